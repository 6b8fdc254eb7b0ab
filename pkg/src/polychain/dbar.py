"""Numerical check of the Cramer-rule formula for df/dzbar on the circles of a chain.

On |w| = 1 put K(w, t) = f(c(t) + r(t) w).  Differentiating in t and in the
angle psi gives a 2x2 linear system for (f_z, f_zbar); its solution is

    f_zbar = [i r w^2 K_t - w (c' + r' w) K_psi] / (i r d(w, t)),

with d the discriminant.  K_psi = i w K_w comes from the Laurent series and
K_t from centered differences of the Laurent coefficients in t.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .chains import ChainSpec, CircleT, chain_derivatives
from .discriminant import DiscriminantCloud, discriminant_eval, discriminant_roots
from .errors import DomainError, ExtendibilityError
from .laurent import LaurentData, analyze_circle, merom_test

_STENCIL = np.array([1.0, -8.0, 0.0, 8.0, -1.0]) / 12.0
_OFFSETS = np.array([-2, -1, 0, 1, 2])


def dbar_numeric(f: Callable, z, h: float = 1e-3, domain: Optional[Callable] = None):
    """df/dzbar = (f_x + i f_y)/2 with fourth-order centered stencils."""
    z = np.asarray(z, dtype=complex)
    if h <= 0:
        raise ValueError("step must be positive")
    if domain is not None:
        for off in (2 * h, -2 * h, 2j * h, -2j * h):
            if not np.all(domain(z + off)):
                raise DomainError("stencil leaves the declared domain")
    fx = sum(w * np.asarray(f(z + o * h), dtype=complex) for w, o in zip(_STENCIL, _OFFSETS) if w)
    fy = sum(w * np.asarray(f(z + 1j * o * h), dtype=complex) for w, o in zip(_STENCIL, _OFFSETS) if w)
    return 0.5 * (fx + 1j * fy) / h


@dataclass
class CircleJet:
    """Laurent data at t together with its centered t-derivative."""

    t: float
    center: complex
    radius: float
    dc: complex
    dr: float
    coeffs: np.ndarray
    dcoeffs: np.ndarray

    @property
    def K(self) -> int:
        return (len(self.coeffs) - 1) // 2


def circle_jet(chain: ChainSpec, f: Callable, t: float, h: float, N: int = 128,
               K: Optional[int] = None, order: int = 4) -> CircleJet:
    """Coefficients at t and their centered t-derivative (order 2 or 4).

    All stencil circles come from the piece containing t, so the difference
    never straddles a junction.
    """
    k = chain.piece_index(t)
    piece = chain.pieces[k]
    # keep the outermost stencil circles away from the degenerate ends
    h = min(h, 0.4 * t, 0.4 * (1 - t))

    def coeffs(s):
        circ = CircleT(complex(piece.center(np.float64(s))), float(piece.radius(np.float64(s))), s)
        return analyze_circle(f, circ, N, K)

    d0 = coeffs(t)
    if order == 2:
        da = (coeffs(t + h).coeffs - coeffs(t - h).coeffs) / (2 * h)
    elif order == 4:
        da = sum(w * coeffs(t + o * h).coeffs for w, o in zip(_STENCIL, _OFFSETS) if w) / h
    else:
        raise ValueError("order must be 2 or 4")
    dc, dr = chain_derivatives(chain, t, piece=k)
    return CircleJet(t, d0.center, d0.radius, dc, dr, d0.coeffs, da)


def cramer_rhs(jet: CircleJet, w, rel_threshold: float = 1e-6):
    """Right-hand side of the Cramer formula at points w on |w| = 1.

    Points where |d(w, t)| <= rel_threshold (|c'| + 2|r'|) come back as NaN.
    """
    w = np.asarray(w, dtype=complex)
    ks = np.arange(-jet.K, jet.K + 1)
    powers = w[..., None] ** ks
    K_psi = 1j * (powers @ (ks * jet.coeffs))
    K_t = powers @ jet.dcoeffs
    d = discriminant_eval(jet.dc, jet.dr, w)
    num = 1j * jet.radius * w**2 * K_t - w * (jet.dc + jet.dr * w) * K_psi
    with np.errstate(divide="ignore", invalid="ignore"):
        out = num / (1j * jet.radius * d)
    bad = np.abs(d) <= rel_threshold * (abs(jet.dc) + 2 * abs(jet.dr))
    return np.where(bad, np.nan + 0j, out)


@dataclass
class DbarReport:
    t: float
    max_identity_residual: float
    n_excluded: int = 0
    g_source: str = "numeric"
    center_order: Optional[int] = None
    center_kind: Optional[str] = None  # "zero" or "pole"
    extra_pole_locations: list = field(default_factory=list)
    discriminant_root_used: Optional[complex] = None
    nearest_discriminant_distance: Optional[float] = None


def identity_check(chain: ChainSpec, f: Callable, t_grid, n_theta: int = 64,
                   g: Optional[Callable] = None, N: int = 128, K: Optional[int] = None,
                   h: Optional[float] = None, dbar_step: float = 1e-3, order: int = 4) -> list:
    """Per-t max |cramer_rhs - g| over the angle grid.

    ``g`` is the exact d/dzbar when known; otherwise the fourth-order stencil
    is used.  The t-differencing step defaults to the grid spacing.  Pass
    ``order=2`` for the plain three-point difference.
    """
    ts = np.asarray(t_grid, dtype=float)
    step = float(np.median(np.diff(ts))) if h is None else float(h)
    w = np.exp(2j * np.pi * np.arange(n_theta) / n_theta)
    reports = []
    for t in ts:
        jet = circle_jet(chain, f, float(t), step, N, K, order)
        rhs = cramer_rhs(jet, w)
        z = jet.center + jet.radius * w
        ref = g(z) if g is not None else dbar_numeric(f, z, dbar_step)
        ok = np.isfinite(rhs)
        res = float(np.max(np.abs(rhs[ok] - ref[ok]))) if np.any(ok) else 0.0
        reports.append(DbarReport(float(t), res, int(np.sum(~ok)),
                                  "exact" if g is not None else "numeric"))
    return reports


def observed_order(residuals, factor: float = 2.0) -> list:
    """log_factor of successive residual ratios under grid refinement."""
    r = np.asarray(residuals, dtype=float)
    return list(np.log(r[:-1] / r[1:]) / np.log(factor))


# -- pole bookkeeping ----------------------------------------------------------

@dataclass
class PrincipalPart:
    center_order: int
    extra_pole: Optional[complex]
    extra_residue: Optional[complex]
    geometric_misfit: float
    taylor: np.ndarray  # Taylor coefficients of the extension at w = 0 (first few)


def principal_part(data: LaurentData, max_center_order: int, floor: float = 1e-7,
                   n_fit: int = 12) -> PrincipalPart:
    """Split the negative Fourier coefficients into a center pole plus one simple pole.

    Beyond index ``max_center_order`` a single simple pole at w = p with residue
    R contributes a_{-n} = R p^(n-1), so p is the least-squares ratio of
    consecutive tail coefficients.  The center order is the last index whose
    corrected coefficient exceeds ``floor`` times the series maximum.
    """
    neg = data.negative()  # a_{-1}, a_{-2}, ...
    scale = float(np.max(np.abs(data.coeffs))) if data.coeffs.size else 0.0
    if scale == 0.0:
        return PrincipalPart(0, None, None, 0.0, np.zeros(2, dtype=complex))
    m = max_center_order
    tail = neg[m:m + n_fit + 1]
    p = R = None
    misfit = 0.0
    if len(tail) > 1 and np.max(np.abs(tail)) > floor * scale:
        x, y = tail[:-1], tail[1:]
        p = complex(np.vdot(x, y) / np.vdot(x, x))
        misfit = float(np.linalg.norm(y - p * x) / np.linalg.norm(y)) if np.linalg.norm(y) > 0 else 0.0
        R = complex(tail[0] / p**m) if p != 0 else complex(tail[0])
    corrected = neg[:m].copy()
    if p is not None and p != 0:
        corrected -= R * p ** np.arange(m)
    big = np.flatnonzero(np.abs(corrected) > floor * scale)
    order = int(big[-1] + 1) if len(big) else 0
    taylor = np.array([data.coeff(0), data.coeff(1)], dtype=complex)
    if p is not None and p != 0:
        taylor = taylor - R / p ** np.arange(1, 3)
    return PrincipalPart(order, p, R, misfit, taylor)


@dataclass
class PoleReductionReport:
    passed: bool
    nu: int
    zero_function: bool
    reports: list
    g_source: str
    failures: list = field(default_factory=list)


def pole_reduction_check(chain: ChainSpec, f: Callable, nu: int, t_grid,
                         g: Optional[Callable] = None, cloud: Optional[DiscriminantCloud] = None,
                         N: int = 256, K: Optional[int] = None, tol: float = 1e-8,
                         floor: float = 1e-7, geo_tol: Optional[float] = None) -> PoleReductionReport:
    """Pole-order bookkeeping for g = df/dzbar on every circle of the grid.

    nu = 0: g must vanish to order >= 2 at the center and have at most one
    simple pole inside.  nu > 0: the center pole of g has order <= nu - 1 and
    every extra pole lies within ``geo_tol`` of the discriminant cloud.
    """
    source = "exact" if g is not None else "numeric"
    gfun = g if g is not None else (lambda z: dbar_numeric(f, z))
    ts = np.asarray(t_grid, dtype=float)
    K = N // 4 if K is None else K
    reports, failures = [], []
    all_zero = True
    for t in ts:
        c = complex(chain.center_fn(t))
        r = float(chain.radius_fn(t))
        data = analyze_circle(gfun, CircleT(c, r, float(t)), N, K)
        gmax = float(np.max(np.abs(data.coeffs)))
        if gmax < 1e-12:
            reports.append(DbarReport(float(t), 0.0, g_source=source, center_order=0, center_kind="zero-function"))
            continue
        all_zero = False
        allowed = max(nu - 1, 0)
        pp = principal_part(data, allowed + 1, floor=floor)
        dc, dr = chain_derivatives(chain, float(t))
        w_in = discriminant_roots(dc, dr).inner
        extra = []
        if pp.extra_pole is not None and abs(pp.extra_pole) < 1:
            if pp.geometric_misfit > 1e-6:
                raise ExtendibilityError(
                    f"g has more than one off-center pole at t={t:.6g}", t=float(t), defect=pp.geometric_misfit)
            extra.append(c + r * pp.extra_pole)
        rep = DbarReport(float(t), 0.0, g_source=source, extra_pole_locations=extra,
                         discriminant_root_used=w_in)
        if nu == 0:
            zero_order = 0
            for coef in pp.taylor:
                if abs(coef) > floor * gmax:
                    break
                zero_order += 1
            rep.center_kind, rep.center_order = "zero", zero_order
            if pp.center_order > 0 or zero_order < 2 or len(extra) > 1:
                failures.append(float(t))
        else:
            rep.center_kind, rep.center_order = "pole", pp.center_order
            if pp.center_order > nu - 1:
                failures.append(float(t))
        if extra and cloud is not None and len(cloud.s):
            dist = float(np.min(np.abs(cloud.s - extra[0])))
            rep.nearest_discriminant_distance = dist
            if dist > (cloud.epsilon if geo_tol is None else geo_tol):
                failures.append(float(t))
        reports.append(rep)
    if all_zero:
        return PoleReductionReport(True, nu, True, reports, source)
    return PoleReductionReport(not failures, nu, False, reports, source, failures)


def extension_defect(f: Callable, circle: CircleT, nu: int, N: int = 256) -> float:
    return merom_test(analyze_circle(f, circle, N), nu).defect
