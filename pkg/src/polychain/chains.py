"""Chains of circles t -> C(c(t), r(t)) on [0, 1] and the standard example chains.

A chain is stored as a tuple of smooth pieces.  Each piece carries formulas
that stay valid slightly beyond its own interval, so finite differences in t
can be taken without straddling a junction where the glued family is only C^1.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from numpy.polynomial import Polynomial

from .errors import (
    ConfigurationError,
    DegenerateCircleError,
    DomainError,
    ParameterRangeError,
)

ComplexFn = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class CircleT:
    center: complex
    radius: float
    t: float

    def __post_init__(self):
        if not self.radius > 0:
            raise DegenerateCircleError(f"radius {self.radius!r} is not positive")

    def points(self, n: int) -> np.ndarray:
        theta = 2 * np.pi * np.arange(n) / n
        return self.center + self.radius * np.exp(1j * theta)


@dataclass(frozen=True)
class RadiusProfile:
    """A radius profile t -> r(t) together with its derivative."""

    value: Callable
    deriv: Optional[Callable] = None
    label: str = "custom"

    def __call__(self, t):
        return self.value(t)


def polynomial_profile(coeffs: Sequence[float]) -> RadiusProfile:
    """Profile from increasing-power coefficients, r(t) = sum coeffs[k] t^k."""
    p = Polynomial(np.asarray(coeffs, dtype=float))
    return RadiusProfile(p, p.deriv(), label=f"poly{list(map(float, coeffs))}")


def default_profile() -> RadiusProfile:
    """r(t) = 4t(1-t): zero at both ends, one at t = 1/2."""
    prof = polynomial_profile([0.0, 4.0, -4.0])
    return RadiusProfile(prof.value, prof.deriv, label="default")


@dataclass(frozen=True)
class ChainPiece:
    t0: float
    t1: float
    center: ComplexFn
    radius: Callable
    dcenter: Optional[ComplexFn] = None
    dradius: Optional[Callable] = None

    @property
    def closed_form(self) -> bool:
        return self.dcenter is not None and self.dradius is not None


@dataclass(frozen=True)
class ChainSpec:
    """One-parameter family of circles shrinking from ``endpoint_a`` to ``endpoint_b``.

    ``singular_params`` lists parameters where |c'|^2 + |r'|^2 vanishes; grids
    built by :func:`t_grid` keep ``exclusion`` away from them.
    """

    pieces: tuple
    endpoint_a: complex
    endpoint_b: complex
    kind: str = "custom"
    fd_step: float = 1e-5
    singular_params: tuple = ()
    exclusion: float = 1e-6
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if abs(self.endpoint_a - self.endpoint_b) == 0:
            raise ConfigurationError("chain endpoints must differ")
        if not self.pieces:
            raise ConfigurationError("chain needs at least one piece")

    @property
    def breakpoints(self) -> tuple:
        return tuple(p.t1 for p in self.pieces[:-1])

    @property
    def derivative_mode(self) -> str:
        if all(p.closed_form for p in self.pieces):
            return "closed-form"
        return f"central-difference({self.fd_step:g})"

    def piece_index(self, t: float) -> int:
        for i, p in enumerate(self.pieces):
            if t <= p.t1:
                return i
        return len(self.pieces) - 1

    def _dispatch(self, t, attr, piece):
        t = np.asarray(t, dtype=float)
        if piece is not None:
            return getattr(self.pieces[piece], attr)(t)
        if len(self.pieces) == 1:
            return getattr(self.pieces[0], attr)(t)
        idx = np.searchsorted(np.array(self.breakpoints), t, side="left")
        out = None
        for i, p in enumerate(self.pieces):
            mask = idx == i
            if not np.any(mask):
                continue
            vals = np.asarray(getattr(p, attr)(t[mask]) if t.ndim else getattr(p, attr)(t))
            if t.ndim == 0:
                return vals
            if out is None:
                out = np.zeros(t.shape, dtype=vals.dtype)
            out = out.astype(np.result_type(out, vals))
            out[mask] = vals
        return out

    def center_fn(self, t, piece=None):
        return self._dispatch(t, "center", piece)

    def radius_fn(self, t, piece=None):
        return self._dispatch(t, "radius", piece)


def circle_at(chain: ChainSpec, t: float) -> CircleT:
    if not 0.0 < t < 1.0:
        raise ParameterRangeError(f"t={t!r} outside (0, 1)")
    c = complex(chain.center_fn(t))
    r = float(chain.radius_fn(t))
    if not r > 0:
        raise DegenerateCircleError(f"r({t})={r} is not positive")
    return CircleT(c, r, t)


def chain_derivatives(chain: ChainSpec, t: float, piece: Optional[int] = None):
    """Return (c'(t), r'(t)); closed form when every piece supplies it."""
    if not 0.0 < t < 1.0:
        raise ParameterRangeError(f"t={t!r} outside (0, 1)")
    k = chain.piece_index(t) if piece is None else piece
    p = chain.pieces[k]
    if p.closed_form:
        return complex(p.dcenter(np.float64(t))), float(p.dradius(np.float64(t)))
    h = chain.fd_step
    dc = (complex(p.center(np.float64(t + h))) - complex(p.center(np.float64(t - h)))) / (2 * h)
    dr = (float(p.radius(np.float64(t + h))) - float(p.radius(np.float64(t - h)))) / (2 * h)
    return dc, dr


def chain_derivatives_array(chain: ChainSpec, ts) -> tuple:
    ts = np.asarray(ts, dtype=float)
    dc = np.empty(ts.shape, dtype=complex)
    dr = np.empty(ts.shape, dtype=float)
    for i, t in enumerate(ts):
        dc[i], dr[i] = chain_derivatives(chain, float(t))
    return dc, dr


# -- hyperbolic circles ------------------------------------------------------

def hyperbolic_circle_params(hyp_center: complex, hyp_radius: float) -> CircleT:
    """Euclidean circle equal to {z : |(z - a)/(1 - conj(a) z)| = rho}."""
    a = complex(hyp_center)
    rho = float(hyp_radius)
    if abs(a) >= 1:
        raise DomainError(f"hyperbolic center {a} not in the unit disc")
    if not 0 < rho <= 1:
        raise DomainError(f"hyperbolic radius {rho} not in (0, 1]")
    c, r = _hyp_center(a, rho), _hyp_radius(a, rho)
    return CircleT(complex(c), float(r), np.nan)


def _hyp_center(a, rho):
    A = abs(a) ** 2
    return a * (1 - rho**2) / (1 - A * rho**2)


def _hyp_radius(a, rho):
    A = abs(a) ** 2
    return rho * (1 - A) / (1 - A * rho**2)


def _hyp_center_drho(a, rho):
    A = abs(a) ** 2
    return a * 2 * rho * (A - 1) / (1 - A * rho**2) ** 2


def _hyp_radius_drho(a, rho):
    A = abs(a) ** 2
    return (1 - A) * (1 + A * rho**2) / (1 - A * rho**2) ** 2


def _hyperbolic_piece(a, prof, t0, t1):
    def center(t):
        return _hyp_center(a, prof(t)) + 0j

    def radius(t):
        return _hyp_radius(a, prof(t))

    dcenter = dradius = None
    if prof.deriv is not None:
        def dcenter(t):
            return _hyp_center_drho(a, prof(t)) * prof.deriv(t) + 0j

        def dradius(t):
            return _hyp_radius_drho(a, prof(t)) * prof.deriv(t)

    return ChainPiece(t0, t1, center, radius, dcenter, dradius)


def _horicycle_piece(a, prof, t0, t1):
    # Hor(a, r): radius r, internally tangent to the unit circle at a.
    def center(t):
        return a * (1 - prof(t))

    def dcenter(t):
        return -a * prof.deriv(t) + 0j

    return ChainPiece(
        t0, t1, center, prof,
        dcenter if prof.deriv is not None else None,
        prof.deriv,
    )


def _concentric_piece(prof, t0, t1):
    def center(t):
        return np.zeros_like(np.asarray(t, dtype=float)) + 0j

    return ChainPiece(
        t0, t1, center, prof,
        center if prof.deriv is not None else None,
        prof.deriv,
    )


def check_two_branch_profile(prof: RadiusProfile, n: int = 401, tol: float = 1e-9):
    """Validate r(0) = r(1) = 0, r(1/2) = 1 and 0 < r <= 1 inside, on a sample grid."""
    if abs(prof(0.0)) > tol or abs(prof(1.0)) > tol:
        raise ConfigurationError("profile must vanish at t = 0 and t = 1")
    if abs(prof(0.5) - 1.0) > tol:
        raise ConfigurationError("profile must equal 1 at t = 1/2")
    ts = np.linspace(0, 1, n)[1:-1]
    vals = np.asarray(prof(ts), dtype=float)
    if np.any(vals <= 0) or np.any(vals > 1 + tol):
        raise ConfigurationError("profile must satisfy 0 < r(t) <= 1 on (0, 1)")
    left = np.asarray(prof(np.linspace(0, 0.5, n)), dtype=float)
    if np.any(np.diff(left) < -tol):
        raise ConfigurationError("profile must be nondecreasing on [0, 1/2]")


def _junction_singular(prof, chain_kind):
    if prof.deriv is not None and abs(prof.deriv(0.5)) < 1e-12:
        return (0.5,)
    return ()


def build_hyperbolic_chain(a: complex, b: complex, radius_profile: Optional[RadiusProfile] = None) -> ChainSpec:
    """H(a, r(t)) for t <= 1/2, then H(b, r(t)) for t >= 1/2."""
    a, b = complex(a), complex(b)
    if abs(a) >= 1 or abs(b) >= 1:
        raise DomainError("hyperbolic chain endpoints must lie in the open unit disc")
    if a == b:
        raise ConfigurationError("endpoints must differ")
    prof = radius_profile or default_profile()
    check_two_branch_profile(prof)
    pieces = (_hyperbolic_piece(a, prof, 0.0, 0.5), _hyperbolic_piece(b, prof, 0.5, 1.0))
    return ChainSpec(pieces, a, b, kind="hyperbolic",
                     singular_params=_junction_singular(prof, "hyperbolic"),
                     meta={"profile": prof.label})


def build_horicycle_chain(a: complex, b: complex, radius_profile: Optional[RadiusProfile] = None) -> ChainSpec:
    a, b = complex(a), complex(b)
    if abs(abs(a) - 1) > 1e-12 or abs(abs(b) - 1) > 1e-12:
        raise DomainError("horicycle endpoints must lie on the unit circle")
    if a == b:
        raise ConfigurationError("endpoints must differ")
    prof = radius_profile or default_profile()
    check_two_branch_profile(prof)
    pieces = (_horicycle_piece(a, prof, 0.0, 0.5), _horicycle_piece(b, prof, 0.5, 1.0))
    return ChainSpec(pieces, a, b, kind="horicycle",
                     singular_params=_junction_singular(prof, "horicycle"),
                     meta={"profile": prof.label})


def build_mixed_chain(b: complex, radius_profile: Optional[RadiusProfile] = None) -> ChainSpec:
    """Concentric circles C(0, r(t)) for t <= 1/2, horicycles at b afterwards."""
    b = complex(b)
    if abs(abs(b) - 1) > 1e-12:
        raise DomainError("mixed chain endpoint b must lie on the unit circle")
    prof = radius_profile or default_profile()
    check_two_branch_profile(prof)
    pieces = (_concentric_piece(prof, 0.0, 0.5), _horicycle_piece(b, prof, 0.5, 1.0))
    return ChainSpec(pieces, 0j, b, kind="mixed",
                     singular_params=_junction_singular(prof, "mixed"),
                     meta={"profile": prof.label})


def build_linear_chain(a: complex, b: complex, radius_scale: float = 0.25,
                       radius_profile: Optional[RadiusProfile] = None) -> ChainSpec:
    """Center moving on the segment a -> b, radius ``radius_scale * r(t)``."""
    a, b = complex(a), complex(b)
    prof = radius_profile or default_profile()
    s = float(radius_scale)

    def center(t):
        return a + (b - a) * np.asarray(t, dtype=float)

    def dcenter(t):
        return (b - a) + 0 * np.asarray(t, dtype=float)

    def radius(t):
        return s * prof(t)

    dradius = None
    if prof.deriv is not None:
        def dradius(t):
            return s * prof.deriv(t)

    piece = ChainPiece(0.0, 1.0, center, radius, dcenter, dradius)
    return ChainSpec((piece,), a, b, kind="linear",
                     meta={"profile": prof.label, "radius_scale": s})


def build_custom_chain(ts, centers, radii, fd_step: Optional[float] = None) -> ChainSpec:
    """Chain from tabulated (t, c, r) triples.

    Interpolation is piecewise cubic Hermite (PCHIP): C^1, with exact
    derivatives, and it never overshoots, so r stays nonnegative.  Passing
    ``fd_step`` switches to centered differences of the interpolant instead.
    """
    from scipy.interpolate import PchipInterpolator

    ts = np.asarray(ts, dtype=float)
    centers = np.asarray(centers, dtype=complex)
    radii = np.asarray(radii, dtype=float)
    if ts.ndim != 1 or len(ts) < 3 or not (len(ts) == len(centers) == len(radii)):
        raise ConfigurationError("tabulated chain needs matching 1-D arrays of length >= 3")
    if np.any(np.diff(ts) <= 0):
        raise ConfigurationError("tabulated t values must increase")
    if abs(ts[0]) > 1e-12 or abs(ts[-1] - 1) > 1e-12:
        raise ConfigurationError("tabulated t values must span [0, 1]")
    if np.any(radii < 0):
        raise ConfigurationError("tabulated radii must be nonnegative")

    interp = [PchipInterpolator(ts, v) for v in (centers.real, centers.imag, radii)]
    h = float(np.min(np.diff(ts))) * 1e-3 if fd_step is None else float(fd_step)
    pieces = []
    # one piece per interval: its cubic extends past the knots, so t-stencils
    # never straddle the jump in the second derivative
    for i in range(len(ts) - 1):
        x, y, r = (Polynomial(p.c[::-1, i]) for p in interp)
        t0 = ts[i]

        def center(t, x=x, y=y, t0=t0):
            u = np.asarray(t, dtype=float) - t0
            return x(u) + 1j * y(u)

        def radius(t, r=r, t0=t0):
            return r(np.asarray(t, dtype=float) - t0)

        if fd_step is None:
            dx, dy, dr = x.deriv(), y.deriv(), r.deriv()

            def dcenter(t, dx=dx, dy=dy, t0=t0):
                u = np.asarray(t, dtype=float) - t0
                return dx(u) + 1j * dy(u)

            def dradius(t, dr=dr, t0=t0):
                return dr(np.asarray(t, dtype=float) - t0)

            pieces.append(ChainPiece(float(ts[i]), float(ts[i + 1]), center, radius, dcenter, dradius))
        else:
            pieces.append(ChainPiece(float(ts[i]), float(ts[i + 1]), center, radius))
    return ChainSpec(tuple(pieces), complex(centers[0]), complex(centers[-1]),
                     kind="custom", fd_step=h)


def segment_tracing_chain() -> ChainSpec:
    """Real chain from 0 to 1 whose inner discriminant root traces [0, 1].

    c(t) = (1 - (1-2t)^3)/2 and r(t) = 6t(1-t), so c' = kappa r' with
    kappa = (1-2t)/2; the inner root stays real in (-1, 1) and tends to 0 at
    t = 1/2, where c' and r' vanish together.
    """
    def center(t):
        t = np.asarray(t, dtype=float)
        return (1 - (1 - 2 * t) ** 3) / 2 + 0j

    def dcenter(t):
        t = np.asarray(t, dtype=float)
        return 3 * (1 - 2 * t) ** 2 + 0j

    def radius(t):
        t = np.asarray(t, dtype=float)
        return 6 * t * (1 - t)

    def dradius(t):
        t = np.asarray(t, dtype=float)
        return 6 * (1 - 2 * t)

    piece = ChainPiece(0.0, 1.0, center, radius, dcenter, dradius)
    return ChainSpec((piece,), 0j, 1 + 0j, kind="segment", singular_params=(0.5,))


# -- grids and diagnostics ---------------------------------------------------

def t_grid(chain: ChainSpec, n: int, delta: float = 0.02, *, refine: bool = True,
           r_floor: float = 1e-3, exclusion: Optional[float] = None) -> np.ndarray:
    """Uniform grid on [delta, 1 - delta], refined x4 within 0.05 of junctions.

    Points closer than ``exclusion`` to a singular parameter and points with
    r(t) below ``r_floor`` are dropped.
    """
    ts = np.linspace(delta, 1 - delta, n)
    if refine and chain.breakpoints:
        step = (1 - 2 * delta) / (n - 1)
        extra = []
        for tb in chain.breakpoints:
            lo, hi = tb - 0.05, tb + 0.05
            sel = ts[(ts >= lo) & (ts < hi)]
            for t0 in sel:
                extra.extend(t0 + step * np.arange(1, 4) / 4)
        ts = np.unique(np.concatenate([ts, np.asarray(extra)]))
        ts = ts[ts <= 1 - delta]
    excl = chain.exclusion if exclusion is None else exclusion
    for ts_sing in chain.singular_params:
        ts = ts[np.abs(ts - ts_sing) > excl]
    if r_floor > 0:
        ts = ts[np.asarray(chain.radius_fn(ts), dtype=float) >= r_floor]
    return ts


def junction_smoothness(chain: ChainSpec, h: float = 1e-6) -> list:
    """One-sided derivatives of c and r at each junction and whether they agree."""
    out = []
    for k, tb in enumerate(chain.breakpoints):
        left, right = chain.pieces[k], chain.pieces[k + 1]
        dcl = (complex(left.center(np.float64(tb))) - complex(left.center(np.float64(tb - h)))) / h
        dcr = (complex(right.center(np.float64(tb + h))) - complex(right.center(np.float64(tb)))) / h
        drl = (float(left.radius(np.float64(tb))) - float(left.radius(np.float64(tb - h)))) / h
        drr = (float(right.radius(np.float64(tb + h))) - float(right.radius(np.float64(tb)))) / h
        jump = max(abs(dcl - dcr), abs(drl - drr))
        out.append({
            "t": tb,
            "dc_left": dcl, "dc_right": dcr,
            "dr_left": drl, "dr_right": drr,
            "jump": jump,
            "c1": bool(jump < 1e-4),
        })
    return out


def hausdorff_step(chain: ChainSpec, ts) -> np.ndarray:
    """Upper bound |dc| + |dr| on the Hausdorff distance of consecutive circles."""
    ts = np.asarray(ts, dtype=float)
    c = np.asarray(chain.center_fn(ts), dtype=complex)
    r = np.asarray(chain.radius_fn(ts), dtype=float)
    return np.abs(np.diff(c)) + np.abs(np.diff(r))


def discriminant_grid(chain: ChainSpec, n: int) -> np.ndarray:
    """Midpoint grid on (0, 1) for sampling S(C); the endpoint limits are kept in reach."""
    return t_grid(chain, n, delta=0.5 / n, r_floor=0.0)
