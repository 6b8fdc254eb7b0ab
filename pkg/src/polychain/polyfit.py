"""Least-squares polyanalytic decompositions.

Euclidean form   f = sum_j conj(z)^j h_j(z)
hyperbolic form  F = sum_j h_j(z) / (1 - |z|^2)^j
with each h_j a polynomial of degree <= D.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field
from math import comb
from typing import Optional

import numpy as np

from .errors import ConditioningError, ConfigurationError, DomainError, InconsistencyError

EUCLIDEAN = "euclidean"
HYPERBOLIC = "hyperbolic"
MAX_COND = 1e12


@dataclass
class PolyDecomposition:
    order: int
    form: str
    components: np.ndarray  # (order + 1, degree + 1): coefficient of z^k in h_j
    residual: float
    region: dict = field(default_factory=dict)
    train_residual: float = float("nan")
    cond: float = float("nan")

    @property
    def degree(self) -> int:
        return self.components.shape[1] - 1

    def __call__(self, z):
        return evaluate(self, z)

    def to_json(self) -> dict:
        return {
            "form": self.form,
            "order": int(self.order),
            "degree": int(self.degree),
            "components": [[[float(c.real), float(c.imag)] for c in row] for row in self.components],
            "residual": float(self.residual),
            "region": self.region,
        }

    @classmethod
    def from_json(cls, d: dict) -> "PolyDecomposition":
        comps = np.array([[complex(re, im) for re, im in row] for row in d["components"]], dtype=complex)
        return cls(int(d["order"]), d["form"], comps, float(d.get("residual", float("nan"))),
                   d.get("region", {}))


def save(dec: PolyDecomposition, path) -> None:
    with open(path, "w") as fh:
        json.dump(dec.to_json(), fh, indent=2)


def load(path) -> PolyDecomposition:
    with open(path) as fh:
        return PolyDecomposition.from_json(json.load(fh))


def _weight(z, j: int, form: str):
    if form == EUCLIDEAN:
        return np.conj(z) ** j
    if form == HYPERBOLIC:
        return (1 - np.abs(z) ** 2) ** (-j)
    raise ConfigurationError(f"unknown form {form!r}")


def design_matrix(z, nu: int, D: int, form: str = EUCLIDEAN) -> np.ndarray:
    """Columns ordered (j, k) -> j * (D + 1) + k."""
    z = np.asarray(z, dtype=complex)
    zk = z[:, None] ** np.arange(D + 1)
    return np.concatenate([_weight(z, j, form)[:, None] * zk for j in range(nu + 1)], axis=1)


def evaluate(dec: PolyDecomposition, z):
    """sum_j w_j(z) h_j(z); components of a hyperbolic result may carry a z^(-shift)."""
    z = np.asarray(z, dtype=complex)
    shift = int(dec.region.get("laurent_shift", 0))
    out = np.zeros(z.shape, dtype=complex)
    for j, h in enumerate(dec.components):
        out = out + _weight(z, j, dec.form) * np.polynomial.polynomial.polyval(z, h)
    return out * z ** (-shift) if shift else out


def annulus_samples(n: int, r0: float = 0.3, r1: float = 0.9, seed: int = 0) -> np.ndarray:
    """Quasi-random points of r0 <= |z| <= r1, uniform in area (scrambled Sobol)."""
    from scipy.stats import qmc

    with warnings.catch_warnings():
        # balance is only exact for powers of two; any n is fine here
        warnings.simplefilter("ignore", UserWarning)
        u = qmc.Sobol(2, scramble=True, seed=seed).random(n)
    rad = np.sqrt(r0**2 + (r1**2 - r0**2) * u[:, 0])
    return rad * np.exp(2j * np.pi * u[:, 1])


def _split(n: int, frac: float, seed: int):
    idx = np.random.default_rng(seed).permutation(n)
    nval = max(1, int(round(frac * n)))
    return idx[nval:], idx[:nval]


def _rel_rms(res, ref) -> float:
    den = np.sqrt(np.mean(np.abs(ref) ** 2))
    num = np.sqrt(np.mean(np.abs(res) ** 2))
    return float(num / den) if den > 0 else float(num)


def fit(z, values, nu: int, D: int = 8, form: str = EUCLIDEAN, val_frac: float = 0.2,
        seed: int = 0, margin: float = 1e-3, max_cond: float = MAX_COND,
        region: Optional[dict] = None) -> PolyDecomposition:
    """Least squares in {w_j(z) z^k : j <= nu, k <= D} with unit-norm column scaling.

    ``residual`` is the relative RMS on a held-out split of ``val_frac``.
    """
    z = np.asarray(z, dtype=complex).ravel()
    f = np.asarray(values, dtype=complex).ravel()
    if nu < 0 or D < 0:
        raise ConfigurationError("order and degree must be nonnegative")
    ncol = (nu + 1) * (D + 1)
    if len(z) < 2 * ncol:
        raise ConfigurationError(f"need at least {2 * ncol} samples, got {len(z)}")
    if form == HYPERBOLIC and np.max(np.abs(z)) > 1 - margin:
        raise DomainError("hyperbolic form needs samples inside |z| <= 1 - margin")
    tr, va = _split(len(z), val_frac, seed)
    A = design_matrix(z, nu, D, form)
    norms = np.linalg.norm(A[tr], axis=0)
    norms[norms == 0] = 1.0
    As = A[tr] / norms
    sv = np.linalg.svd(As, compute_uv=False)
    cond = float(sv[0] / sv[-1]) if sv[-1] > 0 else np.inf
    if cond > max_cond:
        raise ConditioningError(f"design condition number {cond:.3g} exceeds {max_cond:.0e}; "
                                "use a smaller degree or better spread samples")
    coef, *_ = np.linalg.lstsq(As, f[tr], rcond=None)
    coef = coef / norms
    comps = coef.reshape(nu + 1, D + 1)
    res_tr = _rel_rms(A[tr] @ coef - f[tr], f[tr])
    res_va = _rel_rms(A[va] @ coef - f[va], f[va])
    reg = region if region is not None else {"r_min": float(np.min(np.abs(z))), "r_max": float(np.max(np.abs(z)))}
    return PolyDecomposition(nu, form, comps, res_va, reg, res_tr, cond)


@dataclass
class OrderDetection:
    """``residuals[nu]`` is the validation residual at order nu (structural part).

    ``truncation_residual`` is the residual with every order up to ``nu_max``
    allowed, i.e. what the degree-D polynomial basis cannot represent.
    """

    order: Optional[int]
    residuals: list
    truncation_residual: float = float("nan")


def order_detect(z, values, nu_max: int = 6, D: int = 8, tol: float = 1e-6,
                 form: str = EUCLIDEAN, **kw) -> OrderDetection:
    """Smallest nu <= nu_max whose validation residual is below tol (None if none)."""
    residuals = []
    for nu in range(nu_max + 1):
        try:
            dec = fit(z, values, nu, D, form, **kw)
        except ConditioningError:
            residuals.append(float("nan"))
            continue
        residuals.append(dec.residual)
        if dec.residual < tol:
            return OrderDetection(nu, residuals, dec.residual)
    trunc = residuals[-1] if residuals else float("nan")
    return OrderDetection(None, residuals, trunc)


def extrapolation_error(dec: PolyDecomposition, f, radii, n: int = 256) -> list:
    """Relative RMS misfit of ``dec`` against ``f`` on circles |z| = rho.

    The fit only sees its sampling region; this reports, without asserting,
    how the decomposition behaves on other circles.
    """
    theta = 2 * np.pi * np.arange(n) / n
    out = []
    for rho in radii:
        z = rho * np.exp(1j * theta)
        ref = np.asarray(f(z), dtype=complex)
        out.append({"radius": float(rho), "rel_error": _rel_rms(evaluate(dec, z) - ref, ref)})
    return out


def euclidean_to_hyperbolic(dec: PolyDecomposition, tol: float = 1e-9,
                            strict: bool = True) -> PolyDecomposition:
    """Rewrite G = sum_j conj(z)^j g_j(z) as sum_m h_m(z) / (1 - |z|^2)^m, m <= nu.

    ``dec`` fits G = F (1 - |z|^2)^nu.  With s = 1 - |z|^2 and
    conj(z) = (1 - s)/z,

        G = sum_i s^i u_i(z),  u_i = sum_{j >= i} C(j, i) (-1)^i g_j(z) z^(-j),

    so F = G / s^nu has h_m = u_(nu - m).  Each u_i must be analytic at 0,
    i.e. its Laurent polynomial must have no negative powers; with ``strict``
    a violation above ``tol`` raises, otherwise the negative part is kept
    and the components are stored multiplied by z^nu
    (``region['laurent_shift']``), which :func:`evaluate` undoes.
    """
    if dec.form != EUCLIDEAN:
        raise ConfigurationError("input must be in Euclidean form")
    nu, D = dec.order, dec.degree
    g = dec.components
    scale = max(float(np.max(np.abs(g))), 1.0) if g.size else 1.0
    # u_i as Laurent polynomials with powers -nu..D, index p + nu
    u = np.zeros((nu + 1, D + nu + 1), dtype=complex)
    for i in range(nu + 1):
        for j in range(i, nu + 1):
            u[i, nu - j: nu - j + D + 1] += comb(j, i) * (-1) ** i * g[j]
    neg = u[:, :nu]
    defect = float(np.max(np.abs(neg))) if neg.size else 0.0
    if strict and defect > tol * scale:
        raise InconsistencyError(f"components not divisible by z^j (defect {defect:.3g}); "
                                 "input is not of the form F (1 - |z|^2)^nu with F in the target class")
    if defect <= tol * scale:
        comps = u[::-1, nu:]
        shift = 0
    else:
        comps = u[::-1, :]
        shift = nu
    region = dict(dec.region)
    region["laurent_shift"] = shift
    region["divisibility_defect"] = defect
    return PolyDecomposition(nu, HYPERBOLIC, comps, dec.residual, region)
