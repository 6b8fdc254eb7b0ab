"""Zeros and poles of the extensions G_t: root finding, branch tracking, traveling counts,
the Cauchy branch sums and the argument-principle integral I(q)."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment

from .chains import ChainSpec, CircleT, chain_derivatives, discriminant_grid
from .errors import (ConditioningError, ExtendibilityError, IndeterminateWindingError,
                     UnreliableQuadratureError, ZeroFunctionError)
from .laurent import (MeromorphicExtension, analyze_circle, build_extension,
                      extension_boundary_values, merom_test)

NOISE = 1e-12
CLUSTER = 1e-6
BOUNDARY = 1e-4


# -- roots of one extension ----------------------------------------------------

@dataclass(frozen=True)
class RootSet:
    """Zeros of G inside |w| < 1 and the order of the center pole.

    ``roots`` excludes zeros at w = 0 that cancel the center pole; a zero
    left over at the center after cancellation is listed with w = 0.
    """

    roots: tuple  # (w, multiplicity)
    pole_order: int
    boundary: tuple = ()  # roots within BOUNDARY of |w| = 1, not counted

    @property
    def n_zeros(self) -> int:
        return sum(m for _, m in self.roots)


def _cluster(roots: np.ndarray, radius: float):
    """Group eigenvalues closer than ``radius`` (single linkage); returns (mean, count)."""
    out = []
    used = np.zeros(len(roots), dtype=bool)
    for i in range(len(roots)):
        if used[i]:
            continue
        members = [i]
        used[i] = True
        k = 0
        while k < len(members):
            near = np.flatnonzero(~used & (np.abs(roots - roots[members[k]]) < radius))
            used[near] = True
            members.extend(near.tolist())
            k += 1
        out.append((complex(np.mean(roots[members])), len(members)))
    return out


def _newton(coeffs: np.ndarray, w: complex, steps: int = 3) -> complex:
    P = np.polynomial.Polynomial(coeffs)
    dP = P.deriv()
    for _ in range(steps):
        d = dP(w)
        if d == 0:
            break
        step = P(w) / d
        w = w - step
        if abs(step) < 1e-15 * max(1.0, abs(w)):
            break
    return complex(w)


def polynomial_roots(coeffs, cluster: float = CLUSTER):
    """Roots of sum coeffs[k] w^k (increasing powers) as (w, multiplicity).

    Coefficients below NOISE times the largest are zeroed first, so exact
    low-order zeros come out at w = 0 and spurious top-degree noise is dropped.
    """
    c = np.array(coeffs, dtype=complex)
    scale = np.max(np.abs(c)) if c.size else 0.0
    if scale == 0.0:
        raise ZeroFunctionError("all coefficients vanish")
    c[np.abs(c) <= NOISE * scale] = 0
    nz = np.flatnonzero(c)
    lo, hi = nz[0], nz[-1]
    out = [(0j, int(lo))] if lo > 0 else []
    core = c[lo:hi + 1]
    if len(core) > 1:
        eig = np.polynomial.polynomial.polyroots(core)
        for w, m in _cluster(eig, cluster):
            out.append((_newton(core, w) if m == 1 else w, m))
    return out


def roots_inside(ext: MeromorphicExtension, boundary_tol: float = BOUNDARY,
                 cluster: float = CLUSTER) -> RootSet:
    """Zeros of w^nu G(w) in |w| < 1, after cancelling the center pole."""
    allr = polynomial_roots(ext.series, cluster)
    m0 = sum(m for w, m in allr if w == 0)
    cancel = min(m0, ext.pole_order)
    inside, boundary = [], []
    for w, m in allr:
        if w == 0:
            if m - cancel > 0:
                inside.append((0j, m - cancel))
            continue
        if abs(abs(w) - 1) < boundary_tol:
            boundary.append((w, m))
        elif abs(w) < 1:
            inside.append((w, m))
    return RootSet(tuple(inside), ext.pole_order - cancel, tuple(boundary))


# -- winding -------------------------------------------------------------------

def _upsample(vals: np.ndarray, factor: int) -> np.ndarray:
    N = len(vals)
    spec = np.fft.fft(vals)
    M = N * factor
    big = np.zeros(M, dtype=complex)
    half = N // 2
    big[:half] = spec[:half]
    big[-(N - half):] = spec[half:]
    return np.fft.ifft(big) * factor


def winding_number(vals, noise: float = 1e-10, max_upsample: int = 64) -> int:
    """Total argument increment / 2 pi of periodic samples on a uniform angle grid.

    When some step turns by more than pi/2 the samples are refined by FFT
    zero-padding (they are treated as a trigonometric polynomial).
    """
    v = np.asarray(vals, dtype=complex)
    N = len(v)
    scale = float(np.max(np.abs(v))) if N else 0.0
    small = np.abs(v) <= noise * scale
    if scale == 0.0 or np.any(small):
        j = int(np.flatnonzero(small)[0]) if scale else 0
        raise IndeterminateWindingError(f"sample near zero at theta={2 * np.pi * j / N:.6g}",
                                        theta=2 * np.pi * j / N)
    factor = 1
    while True:
        steps = np.angle(np.roll(v, -1) / v)
        if np.max(np.abs(steps)) <= np.pi / 2:
            return int(round(steps.sum() / (2 * np.pi)))
        factor *= 4
        if factor > max_upsample:
            j = int(np.argmax(np.abs(steps)))
            raise IndeterminateWindingError(f"argument jumps unresolved near theta={2 * np.pi * j / len(v):.6g}",
                                            theta=2 * np.pi * j / len(v))
        v = _upsample(np.asarray(vals, dtype=complex), factor)
        if np.any(np.abs(v) <= noise * scale):
            raise IndeterminateWindingError("refined sample near zero", theta=float("nan"))


def extension_winding(ext: MeromorphicExtension, N: int = 256) -> int:
    N = max(N, 2 * (ext.K + ext.pole_order) + 2)
    return winding_number(extension_boundary_values(ext, N))


# -- branches ------------------------------------------------------------------

@dataclass
class Branch:
    kind: str  # "zero" or "pole"
    t: list = field(default_factory=list)
    z: list = field(default_factory=list)
    w: list = field(default_factory=list)
    multiplicity: list = field(default_factory=list)  # size of the cluster the unit sat in
    traveling: bool = False
    id: int = -1
    weight: int = 1  # roots carried by this branch; 1 for tracked unit roots

    def points(self) -> np.ndarray:
        return np.asarray(self.z, dtype=complex)


@dataclass
class CircleRecord:
    t: float
    center: complex
    radius: float
    defect: float
    n_zeros: int
    pole_order: int
    winding: Optional[int]
    n_boundary: int


@dataclass
class BranchSet:
    branches: list
    chains: list  # joined pieces: lists of branch ids, in t order
    endpoint_a: complex
    endpoint_b: complex
    t_grid: np.ndarray
    records: list = field(default_factory=list)
    delta: float = 0.02
    boundary_degenerate: bool = False
    meta: dict = field(default_factory=dict)

    def of_kind(self, kind: str) -> list:
        return [b for b in self.branches if b.kind == kind]

    def traveling_chains(self, kind: str) -> list:
        return [ch for ch in self.chains if self.branches[ch[0]].kind == kind
                and self.branches[ch[0]].traveling]

    def chain_path(self, chain: Sequence[int], close: bool = True) -> np.ndarray:
        pts = np.concatenate([self.branches[i].points() for i in chain])
        if close:
            pts = np.concatenate([[self.endpoint_a], pts, [self.endpoint_b]])
        return pts

    def rows(self):
        for b in self.branches:
            for t, z, m in zip(b.t, b.z, b.multiplicity):
                yield (b.id, b.kind, t, z.real, z.imag, m, int(b.traveling))


def _match(prev: list, cur: list, threshold: float):
    """Minimal-displacement pairing of unit roots; pairs above threshold are dropped."""
    if not prev or not cur:
        return []
    P = np.array([z for z, _ in prev])
    C = np.array([z for z, _ in cur])
    cost = np.abs(P[:, None] - C[None, :])
    rows, cols = linear_sum_assignment(cost)
    return [(i, j) for i, j in zip(rows, cols) if cost[i, j] <= threshold]


def assemble(kind: str, ts, per_t: list, centers, radii, thresholds) -> list:
    """Continue per-t root lists [(z, w, m)] into branches by assignment matching.

    A cluster of multiplicity m is split into m unit roots first, so
    collisions and partial cancellations at the center need no convention:
    any pairing of coincident units keeps the counts.
    """
    branches = []
    open_ = {}  # index into current list -> branch
    per_t = [[(z, w, m) for z, w, m in roots for _ in range(m)] for roots in per_t]
    for i, roots in enumerate(per_t):
        new_open = {}
        if i > 0:
            prev = per_t[i - 1]
            pairs = _match([(z, m) for z, _, m in prev], [(z, m) for z, _, m in roots], thresholds[i])
            for pi, ci in pairs:
                if pi in open_:
                    new_open[ci] = open_[pi]
        for ci, (z, w, m) in enumerate(roots):
            br = new_open.get(ci)
            if br is None:
                br = Branch(kind)
                branches.append(br)
                new_open[ci] = br
            br.t.append(float(ts[i]))
            br.z.append(complex(z))
            br.w.append(complex(w))
            br.multiplicity.append(int(m))
        open_ = new_open
    return branches


def _end_step(b: Branch, end: int) -> float:
    if len(b.z) < 2:
        return 0.0
    return abs(b.z[-1] - b.z[-2]) if end else abs(b.z[1] - b.z[0])


def _join(branches: list, ts, join_tol: float) -> list:
    """Chain pieces that leave through the circle and re-enter at the same point.

    The exit and entry points are only known to within one step of the
    piece, so the tolerance is ``join_tol`` plus twice both end steps.  The
    earliest entry after the exit is preferred; failing that, an unused piece
    that entered there earlier is taken (two roots that cross can be paired
    either way, and only the traced curves in z matter for the counts).
    """
    order = sorted(range(len(branches)), key=lambda k: branches[k].t[0])
    used = set()
    chains = []
    t_last = ts[-1]
    t_first = ts[0]
    for k in order:
        if k in used:
            continue
        chain = [k]
        used.add(k)
        while True:
            cur = branches[chain[-1]]
            if cur.t[-1] >= t_last:
                break
            end = cur.z[-1]
            best, best_key = None, None
            for j in order:
                b = branches[j]
                if j in used or b.kind != cur.kind or b.t[0] <= t_first:
                    continue
                d = abs(b.z[0] - end)
                if d <= join_tol + 2 * (_end_step(cur, 1) + _end_step(b, 0)):
                    key = (b.t[0] < cur.t[-1], abs(b.t[0] - cur.t[-1]), d)
                    if best_key is None or key < best_key:
                        best, best_key = j, key
            if best is None:
                break
            chain.append(best)
            used.add(best)
        chains.append(chain)
    return chains


def _flag_traveling(bs: BranchSet, radius_fn, join_tol: float):
    ts = bs.t_grid
    for chain in bs.chains:
        first, last = bs.branches[chain[0]], bs.branches[chain[-1]]
        z0, t0 = first.z[0], first.t[0]
        z1, t1 = last.z[-1], last.t[-1]
        tol0 = 10 * float(radius_fn(t0)) if t0 <= ts[0] else join_tol + 2 * _end_step(first, 0)
        tol1 = 10 * float(radius_fn(t1)) if t1 >= ts[-1] else join_tol + 2 * _end_step(last, 1)
        ok = abs(z0 - bs.endpoint_a) <= tol0 and abs(z1 - bs.endpoint_b) <= tol1
        for k in chain:
            bs.branches[k].traveling = ok


def track_branches(chain: ChainSpec, f: Callable, nu: int, t_grid, N: int = 256,
                   K: Optional[int] = None, tol: float = 1e-8, join_tol: Optional[float] = None,
                   speed_factor: float = 10.0, check_winding: bool = True) -> BranchSet:
    """Zero branches of G_t and the center-pole branch p(t) = c(t) of order nu.

    Roots at consecutive parameters are paired by minimal total displacement;
    a pair is kept when its distance is below ``speed_factor`` times the
    circle's own motion |dc| + |dr| over the step (plus a small floor).
    Pieces that leave through C_t and re-enter at the same point later are
    joined; a joined piece travels when it runs from a to b.
    """
    ts = np.asarray(t_grid, dtype=float)
    K = N // 4 if K is None else K
    zeros_t, poles_t, records = [], [], []
    cs = np.asarray(chain.center_fn(ts), dtype=complex)
    rs = np.asarray(chain.radius_fn(ts), dtype=float)
    any_boundary = False
    for i, t in enumerate(ts):
        data = analyze_circle(f, CircleT(cs[i], rs[i], float(t)), N, K)
        mt = merom_test(data, nu, tol)
        if mt.zero_function:
            raise ZeroFunctionError(f"f vanishes on the circle at t={t:.6g}")
        if not mt.passed:
            raise ExtendibilityError(f"extension with pole order {nu} fails at t={t:.6g} "
                                     f"(defect {mt.defect:.3g})", t=float(t), defect=mt.defect)
        ext = build_extension(data, nu)
        rset = roots_inside(ext)
        wind = None
        if rset.boundary:
            any_boundary = True
        elif check_winding:
            wind = extension_winding(ext, N)
        zeros_t.append([(cs[i] + rs[i] * w, w, m) for w, m in rset.roots])
        poles_t.append([(cs[i], 0j, rset.pole_order)] if rset.pole_order > 0 else [])
        records.append(CircleRecord(float(t), complex(cs[i]), float(rs[i]), mt.defect,
                                    rset.n_zeros, rset.pole_order, wind, len(rset.boundary)))

    move = np.abs(np.diff(cs)) + np.abs(np.diff(rs))
    thresholds = np.concatenate([[0.0], speed_factor * move + 1e-3 * np.maximum(rs[1:], rs[:-1])])
    zb = assemble("zero", ts, zeros_t, cs, rs, thresholds)
    pb = assemble("pole", ts, poles_t, cs, rs, np.full(len(ts), np.inf))
    branches = zb + pb
    for k, b in enumerate(branches):
        b.id = k
    if join_tol is None:
        join_tol = 0.02 * float(rs.max())
    chains_ = _join(branches, ts, join_tol)
    bs = BranchSet(branches, chains_, complex(chain.endpoint_a), complex(chain.endpoint_b), ts,
                   records, delta=float(ts[0]), boundary_degenerate=any_boundary,
                   meta={"nu": nu, "N": N, "K": K, "join_tol": join_tol})
    _flag_traveling(bs, chain.radius_fn, join_tol)
    return bs


def count_traveling(bs: BranchSet) -> tuple:
    """(N_g, M_g): multiplicities of traveling zero and pole chains."""
    n = sum(bs.branches[ch[0]].weight for ch in bs.traveling_chains("zero"))
    m = sum(bs.branches[ch[0]].weight for ch in bs.traveling_chains("pole"))
    return n, m


def winding_mismatches(bs: BranchSet) -> list:
    """Circles where winding != zeros - poles (should be empty)."""
    return [r.t for r in bs.records if r.winding is not None and r.winding != r.n_zeros - r.pole_order]


def merge_intervals(bs: BranchSet, min_len: int = 2) -> list:
    """Runs of consecutive samples where a zero branch sits in a cluster of size > 1.

    Isolated collisions last one sample; longer runs are branches that merge
    for an interval of t.  Such runs are counted with multiplicity and
    reported here rather than resolved by a convention.
    """
    out = []
    for b in bs.of_kind("zero"):
        m = np.asarray(b.multiplicity)
        start = None
        for i, v in enumerate(np.append(m, 1)):
            if v > 1 and start is None:
                start = i
            elif v <= 1 and start is not None:
                if i - start >= min_len:
                    out.append({"branch_id": b.id, "t_start": float(b.t[start]), "t_end": float(b.t[i - 1]),
                                "cluster": int(m[start:i].max())})
                start = None
    return out


def branch_from_curve(kind: str, ts, z, multiplicity: int = 1) -> Branch:
    ts = np.asarray(ts, dtype=float)
    z = np.asarray(z, dtype=complex)
    return Branch(kind, list(ts), list(z), [0j] * len(ts), [multiplicity] * len(ts), traveling=True,
                  weight=multiplicity)


def branchset_from_curves(zeros: list, poles: list, a: complex, b: complex, ts) -> BranchSet:
    """BranchSet from closed-form traveling curves [(z(t) samples, multiplicity)]."""
    brs = [branch_from_curve("zero", ts, z, m) for z, m in zeros]
    brs += [branch_from_curve("pole", ts, z, m) for z, m in poles]
    for k, br in enumerate(brs):
        br.id = k
    return BranchSet(brs, [[k] for k in range(len(brs))], complex(a), complex(b), np.asarray(ts))


# -- Cauchy sums ---------------------------------------------------------------

def polyline_distance(pts: np.ndarray, q: complex) -> float:
    a, b = pts[:-1], pts[1:]
    d = b - a
    L2 = np.abs(d) ** 2
    s = np.where(L2 > 0, np.clip(((q - a) * np.conj(d)).real / np.where(L2 > 0, L2, 1), 0, 1), 0)
    return float(np.min(np.abs(a + s * d - q))) if len(pts) > 1 else float(abs(pts[0] - q))


def cauchy_polyline(pts, q: complex, method: str = "segment", margin: float = 0.1) -> complex:
    """Integral of dz/(z - q) along the polyline through ``pts``.

    ``segment`` integrates each straight piece exactly (principal log of the
    endpoint ratio); ``trapezoid`` uses the trapezoid rule on the samples.
    """
    pts = np.asarray(pts, dtype=complex)
    if len(pts) < 2:
        return 0j
    if polyline_distance(pts, q) < margin:
        raise ConditioningError(f"q={q} lies within {margin} of the branch")
    if method == "segment":
        return complex(np.sum(np.log((pts[1:] - q) / (pts[:-1] - q))))
    if method == "trapezoid":
        g = 1 / (pts - q)
        return complex(np.sum(0.5 * (g[1:] + g[:-1]) * np.diff(pts)))
    raise ValueError(f"unknown method {method!r}")


def branch_cauchy_integral(branch: Branch, q: complex, method: str = "segment", margin: float = 0.1) -> complex:
    return cauchy_polyline(branch.points(), q, method, margin)


@dataclass
class BalanceReport:
    passed: bool
    max_abs: float
    values: dict
    tol: float


def verify_zp_balance(bs: BranchSet, q_set, tol: float = 1e-6, method: str = "segment",
                      close: bool = True, margin: float = 0.1) -> BalanceReport:
    """Sum over traveling zero chains minus traveling pole chains of the Cauchy integrals.

    Each chain is closed with its endpoints a and b, so for q off the chain
    envelope the difference is a loop integral and should vanish.
    """
    vals = {}
    for q in q_set:
        q = complex(q)
        tot = 0j
        for kind, sign in (("zero", 1), ("pole", -1)):
            for ch in bs.traveling_chains(kind):
                m = bs.branches[ch[0]].weight
                tot += sign * m * cauchy_polyline(bs.chain_path(ch, close), q, method, margin)
        vals[q] = tot
    mx = max((abs(v) for v in vals.values()), default=0.0)
    return BalanceReport(mx <= tol, float(mx), vals, tol)


# -- the argument-principle integral -------------------------------------------

@dataclass
class IqResult:
    q: complex
    value: complex
    excluded_fraction: float
    n_theta: int
    n_t: int


def _samples(f, c, r, n_theta):
    w = np.exp(2j * np.pi * np.arange(n_theta) / n_theta)
    return np.asarray(f(c + r * w), dtype=complex)


def iq_slice(chain: ChainSpec, f: Callable, q: complex, t: float, n_theta: int, h: float,
             floor: float = 1e-10, margin: float = 0.1, resolve: float = 40.0,
             max_theta: int = 1 << 17):
    """Angle integral of the I(q) density at one parameter value.

    A zero of phi at distance eps from the circle costs about exp(-n eps)
    in the angle sum, so the slice is resampled (f evaluated directly) until
    n eps >= ``resolve`` or ``max_theta`` is reached, with eps estimated as
    min|phi| / max|phi_psi|.  Returns (value, n_theta used, excluded samples).
    """
    k = chain.piece_index(float(t))
    piece = chain.pieces[k]
    c = complex(piece.center(np.float64(t)))
    r = float(piece.radius(np.float64(t)))
    dc, dr = chain_derivatives(chain, float(t), piece=k)

    def phi_at(s, n):
        return _samples(f, complex(piece.center(np.float64(s))), float(piece.radius(np.float64(s))), n)

    n = n_theta
    while True:
        w = np.exp(2j * np.pi * np.arange(n) / n)
        omega = c + r * w
        if np.min(np.abs(omega - q)) < margin * max(1.0, r):
            raise ConditioningError(f"q={q} within margin of the circle at t={t:.6g}")
        kfreq = np.fft.fftfreq(n, 1.0 / n)
        if n % 2 == 0:
            kfreq[n // 2] = 0
        phi = phi_at(t, n)
        phi_psi = np.fft.ifft(1j * kfreq * np.fft.fft(phi))
        ok = np.abs(phi) > floor * np.max(np.abs(phi))
        eps = float(np.min(np.abs(phi[ok])) / max(np.max(np.abs(phi_psi)), 1e-300)) if np.any(ok) else 0.0
        if n * eps >= resolve or 2 * n > max_theta:
            break
        n = min(max_theta, 1 << int(np.ceil(np.log2(max(2 * n, resolve / max(eps, 1e-300))))))
    phi_t = sum(wt * phi_at(t + o * h, n) for wt, o in zip(_D1_WEIGHTS, _D1_OFFSETS)) / h
    dom_t = dc + dr * w
    dom_psi = 1j * r * w
    dens = (phi_psi[ok] * dom_t[ok] - phi_t[ok] * dom_psi[ok]) / (phi[ok] * (omega[ok] - q))
    return complex(dens.sum() * (2 * np.pi / n)), n, int(np.sum(~ok))


_D1_OFFSETS = np.array([-2, -1, 1, 2])
_D1_WEIGHTS = np.array([1.0, -8.0, 8.0, -1.0]) / 12.0


def _zero_count(chain: ChainSpec, f: Callable, nu: int, t: float, N: int) -> int:
    c = complex(chain.center_fn(t))
    r = float(chain.radius_fn(t))
    ext = build_extension(analyze_circle(f, CircleT(c, r, t), N), nu)
    return roots_inside(ext, boundary_tol=0.0).n_zeros


def crossing_times(chain: ChainSpec, f: Callable, nu: int, ts, N: int = 256, xtol: float = 1e-13) -> list:
    """Parameters where a zero of G_t crosses C_t, located by bisection on the interior count."""
    counts = [_zero_count(chain, f, nu, float(t), N) for t in ts]
    out = []
    for i in range(len(ts) - 1):
        if counts[i] == counts[i + 1]:
            continue
        lo, hi, clo = float(ts[i]), float(ts[i + 1]), counts[i]
        while hi - lo > xtol * max(1.0, hi):
            mid = 0.5 * (lo + hi)
            if _zero_count(chain, f, nu, mid, N) == clo:
                lo = mid
            else:
                hi = mid
        out.append((i, 0.5 * (lo + hi)))
    return out


def I_of_q(chain: ChainSpec, f: Callable, nu: int, q: complex, n_theta: int = 512, n_t: int = 512,
           t_grid=None, floor: float = 1e-10, max_excluded: float = 0.05,
           margin: float = 0.1, split_crossings: bool = True, gauss: int = 8) -> IqResult:
    """(1/2 pi i) double integral of dphi/phi ^ domega/(omega - q) over angle x parameter.

    phi(theta, t) = f(c(t) + r(t) e^{i theta}).  The angle derivative is
    spectral, the t-derivative a five-point centered difference on the piece
    containing t (step shrunk near the ends so circles stay nondegenerate).
    The t-rule is the midpoint rule on (0, 1); the angle rule is the
    trapezoid rule, refined per slice when a zero of phi is near the circle.

    When a zero of the extension crosses C_t the angle integral jumps, so the
    two cells around each crossing are re-integrated with Gauss-Legendre on
    either side of the crossing (``split_crossings``; needs the extension of
    pole order ``nu``).  Samples with |phi| below ``floor`` times the max are
    dropped and counted.
    """
    q = complex(q)
    ts = discriminant_grid(chain, n_t) if t_grid is None else np.asarray(t_grid, dtype=float)
    edges = np.concatenate([[0.0], (ts[1:] + ts[:-1]) / 2, [1.0]])
    h0 = 1.0 / len(ts)

    def step(t):
        return min(h0, 0.2 * t, 0.2 * (1 - t))

    vals = np.zeros(len(ts), dtype=complex)
    excluded = 0
    for i, t in enumerate(ts):
        vals[i], _, nex = iq_slice(chain, f, q, float(t), n_theta, step(t), floor, margin)
        excluded += nex
    weights = np.diff(edges)
    total = complex(np.sum(vals * weights))

    crossings = crossing_times(chain, f, nu, ts) if split_crossings else []
    if crossings:
        # spans of cells [edges[i], edges[i + 2]] around each crossing, merged when they touch
        spans = []
        for i, ts_star in crossings:
            lo, hi = i, i + 1
            if spans and lo <= spans[-1][1]:
                spans[-1][1] = hi
                spans[-1][2].append(ts_star)
            else:
                spans.append([lo, hi, [ts_star]])
        x, wg = np.polynomial.legendre.leggauss(gauss)
        for lo, hi, stars in spans:
            total -= complex(np.sum(vals[lo:hi + 1] * weights[lo:hi + 1]))
            cuts = [edges[lo]] + sorted(stars) + [edges[hi + 1]]
            for u, v in zip(cuts[:-1], cuts[1:]):
                for xi, wi in zip(x, wg):
                    t = 0.5 * (u + v) + 0.5 * (v - u) * xi
                    val, _, _ = iq_slice(chain, f, q, float(t), n_theta, step(t), floor, margin)
                    total += 0.5 * (v - u) * wi * val
    frac = excluded / (len(ts) * n_theta)
    if frac > max_excluded:
        raise UnreliableQuadratureError(f"excluded fraction {frac:.3g} above {max_excluded}",
                                        excluded_fraction=frac)
    return IqResult(q, total / (2j * np.pi), frac, n_theta, len(ts))
