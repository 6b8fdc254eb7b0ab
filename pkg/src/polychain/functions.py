"""Registry of test functions with exact d/dzbar, circle extensions and declared order."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import RegistryError


@dataclass(frozen=True)
class TestFunction:
    """A function on the plane plus whatever exact oracles are known for it.

    ``exact_extension(c, r)`` returns the map k -> a_k of the extension into
    C(c, r) written in w = (z - c)/r, i.e. the circle's Fourier coefficients.
    ``form`` says which polyanalytic decomposition ``declared_order`` refers to.
    """

    __test__ = False  # not a pytest class

    id: str
    value: Callable
    exact_dbar: Optional[Callable] = None
    exact_extension: Optional[Callable] = None
    declared_order: Optional[int] = None
    regular: bool = True
    form: str = "euclidean"
    description: str = ""
    params: dict = field(default_factory=dict)

    def __call__(self, z):
        return self.value(z)


# -- Laurent polynomials in w, stored as (lowest power, coefficient array) -----

def _lp_mul(p, q):
    return p[0] + q[0], np.convolve(p[1], q[1])


def _lp_add(p, q):
    lo = min(p[0], q[0])
    hi = max(p[0] + len(p[1]), q[0] + len(q[1]))
    out = np.zeros(hi - lo, dtype=complex)
    out[p[0] - lo:p[0] - lo + len(p[1])] += p[1]
    out[q[0] - lo:q[0] - lo + len(q[1])] += q[1]
    return lo, out


def _lp_dict(p):
    lo, arr = p
    return {lo + i: complex(a) for i, a in enumerate(arr) if a != 0}


def _z_on_circle(c, r):
    return 0, np.array([c, r], dtype=complex)


def _zbar_on_circle(c, r):
    return -1, np.array([r, np.conj(c)], dtype=complex)


def _poly_on_circle(coeffs, c, r):
    """Analytic polynomial sum coeffs[k] z^k restricted to C(c, r), as a polynomial in w."""
    out = (0, np.zeros(1, dtype=complex))
    zpow = (0, np.ones(1, dtype=complex))
    for a in coeffs:
        out = _lp_add(out, (zpow[0], a * zpow[1]))
        zpow = _lp_mul(zpow, _z_on_circle(c, r))
    return out


def _polyval(coeffs, z):
    return np.polynomial.polynomial.polyval(z, np.asarray(coeffs, dtype=complex))


def _polyder(coeffs):
    return np.polynomial.polynomial.polyder(np.asarray(coeffs, dtype=complex))


# -- constructors --------------------------------------------------------------

def conj_times(h_coeffs: Sequence[complex], power: int = 1, id: str = "conj_times",
               regular: bool = True, description: str = "") -> TestFunction:
    """f(z) = conj(z)^power * h(z) with h a polynomial (increasing powers)."""
    h = np.asarray(h_coeffs, dtype=complex)

    def value(z):
        z = np.asarray(z, dtype=complex)
        return np.conj(z) ** power * _polyval(h, z)

    def dbar(z):
        z = np.asarray(z, dtype=complex)
        return power * np.conj(z) ** (power - 1) * _polyval(h, z) + 0 * z

    def ext(c, r):
        out = _poly_on_circle(h, c, r)
        for _ in range(power):
            out = _lp_mul(out, _zbar_on_circle(c, r))
        return _lp_dict(out)

    return TestFunction(id, value, dbar, ext, declared_order=power, regular=regular,
                        description=description or f"conj(z)^{power} h(z)",
                        params={"h": h.tolist(), "power": power})


def conj_poly(centers: Sequence[complex]) -> TestFunction:
    """conj(z)(z - c_1)...(z - c_l): analytic extension into circles centered at any c_j."""
    centers = [complex(c) for c in centers]
    coeffs = np.polynomial.polynomial.polyfromroots(centers) if centers else np.ones(1)
    fn = conj_times(coeffs, 1, id="conj_poly",
                    description="conj(z) * prod (z - c_j)")
    return TestFunction(fn.id, fn.value, fn.exact_dbar, fn.exact_extension, 1, True,
                        "euclidean", fn.description, {"centers": centers})


def analytic_poly(coeffs: Sequence[complex], id: str = "analytic_p") -> TestFunction:
    coeffs = np.asarray(coeffs, dtype=complex)

    def value(z):
        return _polyval(coeffs, np.asarray(z, dtype=complex))

    def dbar(z):
        return np.zeros_like(np.asarray(z, dtype=complex))

    def ext(c, r):
        return _lp_dict(_poly_on_circle(coeffs, c, r))

    return TestFunction(id, value, dbar, ext, declared_order=0,
                        description="analytic polynomial", params={"coeffs": coeffs.tolist()})


def hyper_form(h_list: Sequence[Sequence[complex]], id: str = "hyper_form") -> TestFunction:
    """F = sum_j h_j(z) / (1 - |z|^2)^j with polynomial h_j, defined on the open unit disc."""
    hs = [np.asarray(h, dtype=complex) for h in h_list]

    def value(z):
        z = np.asarray(z, dtype=complex)
        s = 1 - np.abs(z) ** 2
        return sum(_polyval(h, z) / s**j for j, h in enumerate(hs))

    def dbar(z):
        # d/dzbar (1 - z zbar)^(-j) = j z (1 - z zbar)^(-j-1)
        z = np.asarray(z, dtype=complex)
        s = 1 - np.abs(z) ** 2
        return sum(j * z * _polyval(h, z) / s ** (j + 1) for j, h in enumerate(hs)) + 0 * z

    return TestFunction(id, value, dbar, None, declared_order=len(hs) - 1, regular=False,
                        form="hyperbolic", description="sum h_j / (1 - |z|^2)^j",
                        params={"h": [h.tolist() for h in hs]})


def _one_minus_abs2():
    def value(z):
        z = np.asarray(z, dtype=complex)
        return 1 - np.abs(z) ** 2 + 0j

    def dbar(z):
        return -np.asarray(z, dtype=complex)

    def ext(c, r):
        return _lp_dict(_lp_add((0, np.ones(1, dtype=complex)),
                                _lp_mul((0, -np.ones(1, dtype=complex)),
                                        _lp_mul(_z_on_circle(c, r), _zbar_on_circle(c, r)))))

    # vanishes on the unit circle, which is itself a circle of the unit-disc chains
    return TestFunction("one_minus_abs2", value, dbar, ext, declared_order=1, regular=False,
                        description="1 - |z|^2")


def _exp_conj():
    def value(z):
        return np.exp(np.conj(np.asarray(z, dtype=complex)))

    return TestFunction("exp_conj", value, value, None, declared_order=None,
                        description="exp(conj(z)); solves no finite-order polyanalytic equation")


def tabulated(x: np.ndarray, y: np.ndarray, values: np.ndarray, id: str = "tabulated") -> TestFunction:
    """Value-only function from samples on a rectangular (x, y) grid, bicubic-free linear interpolation."""
    from scipy.interpolate import RegularGridInterpolator

    values = np.asarray(values, dtype=complex)
    re = RegularGridInterpolator((x, y), values.real, bounds_error=False, fill_value=np.nan)
    im = RegularGridInterpolator((x, y), values.imag, bounds_error=False, fill_value=np.nan)

    def value(z):
        z = np.asarray(z, dtype=complex)
        pts = np.stack([z.real.ravel(), z.imag.ravel()], axis=-1)
        return (re(pts) + 1j * im(pts)).reshape(z.shape)

    return TestFunction(id, value, description="tabulated samples (value only)", regular=True)


def load_tabulated(path) -> TestFunction:
    """Read a CSV with header x,y,re,im on a full rectangular grid."""
    data = np.loadtxt(path, delimiter=",", skiprows=1)
    xs = np.unique(data[:, 0])
    ys = np.unique(data[:, 1])
    grid = np.full((len(xs), len(ys)), np.nan, dtype=complex)
    ix = np.searchsorted(xs, data[:, 0])
    iy = np.searchsorted(ys, data[:, 1])
    grid[ix, iy] = data[:, 2] + 1j * data[:, 3]
    return tabulated(xs, ys, grid, id=str(path))


# -- registry ------------------------------------------------------------------

DEFAULT_CONJ_POLY_CENTERS = (0.5 + 0j, -0.5j)


def _build_entries():
    entries = [
        conj_times([1.0], 1, id="conj", description="conj(z)"),
        conj_poly(DEFAULT_CONJ_POLY_CENTERS),
        conj_times([0, 1.0], 1, id="abs2", description="|z|^2"),
        conj_times([1.0], 2, id="conj_sq", description="conj(z)^2"),
        conj_times([0, 1.0], 2, id="conj_sq_z", description="conj(z)^2 z"),
        conj_times([2.0, 1.0], 1, id="conj_h", description="conj(z)(2 + z), nonvanishing factor on the disc"),
        _poly_mix(),
        analytic_poly([3.0, 1.0, 0.5], id="analytic_p"),
        _exp_conj(),
        hyper_form([[1.0], [0.0, 1.0]]),
        _one_minus_abs2(),
    ]
    return {e.id: e for e in entries}


def _poly_mix():
    def value(z):
        z = np.asarray(z, dtype=complex)
        return 1 + np.conj(z) * z * z

    def dbar(z):
        z = np.asarray(z, dtype=complex)
        return z * z

    def ext(c, r):
        zsq = _lp_mul(_z_on_circle(c, r), _z_on_circle(c, r))
        return _lp_dict(_lp_add((0, np.ones(1, dtype=complex)), _lp_mul(_zbar_on_circle(c, r), zsq)))

    return TestFunction("poly_mix", value, dbar, ext, declared_order=1, description="1 + conj(z) z^2")


def self_check(fn: TestFunction, n: int = 100, seed: int = 0) -> dict:
    """Compare exact oracles against the numeric stencil and the circle DFT."""
    from .chains import CircleT
    from .dbar import dbar_numeric
    from .laurent import analyze_circle

    rng = np.random.default_rng(seed)
    rad = rng.uniform(0.3, 0.9, n)
    z = rad * np.exp(2j * np.pi * rng.uniform(size=n))
    report = {"id": fn.id, "dbar_error": None, "extension_error": None}
    if fn.exact_dbar is not None:
        exact = fn.exact_dbar(z)
        num = dbar_numeric(fn.value, z, h=1e-3)
        report["dbar_error"] = float(np.max(np.abs(exact - num) / np.maximum(1, np.abs(exact))))
    if fn.exact_extension is not None:
        circle = CircleT(0.2 + 0.1j, 0.5, float("nan"))
        data = analyze_circle(fn.value, circle, N=64, K=16)
        ext = fn.exact_extension(circle.center, circle.radius)
        ref = np.array([ext.get(k, 0) for k in range(-data.K, data.K + 1)])
        report["extension_error"] = float(np.max(np.abs(ref - data.coeffs)))
    report["ok"] = (report["dbar_error"] is None or report["dbar_error"] < 1e-7) and (
        report["extension_error"] is None or report["extension_error"] < 1e-9)
    return report


_REGISTRY: Optional[dict] = None
_CHECKS: dict = {}


def registry() -> dict:
    global _REGISTRY
    if _REGISTRY is None:
        entries = _build_entries()
        for e in entries.values():
            rep = self_check(e)
            if not rep["ok"]:
                raise RegistryError(f"self-check failed for {e.id}: {rep}")
            _CHECKS[e.id] = rep
        _REGISTRY = entries
    return _REGISTRY


def self_check_reports() -> dict:
    registry()
    return dict(_CHECKS)


def builtin(id: str) -> TestFunction:
    reg = registry()
    if id not in reg:
        raise RegistryError(f"unknown function id {id!r}; known: {sorted(reg)}")
    return reg[id]


def list_functions() -> list:
    return [
        {"id": e.id, "order": e.declared_order, "form": e.form, "regular": e.regular,
         "exact_dbar": e.exact_dbar is not None, "exact_extension": e.exact_extension is not None,
         "description": e.description}
        for e in registry().values()
    ]


def resolve_function(spec) -> TestFunction:
    """A registry id, {'id': 'conj_poly', 'centers': [[re, im], ...]}, or {'file': 'samples.csv'}."""
    if isinstance(spec, str):
        return builtin(spec)
    if isinstance(spec, dict):
        if "file" in spec:
            return load_tabulated(spec["file"])
        fid = spec.get("id")
        if fid == "conj_poly" and "centers" in spec:
            centers = [complex(*c) if isinstance(c, (list, tuple)) else complex(c) for c in spec["centers"]]
            return conj_poly(centers)
        if fid is not None:
            return builtin(fid)
    raise RegistryError(f"cannot resolve function spec {spec!r}")
