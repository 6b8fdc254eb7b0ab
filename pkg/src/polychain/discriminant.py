"""The discriminant d(w, t) = conj(c') w^2 + 2 r' w + c' of a chain and its set S(C)."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components
from scipy.spatial import cKDTree

from .chains import ChainSpec, chain_derivatives

BOTH_ON_CIRCLE = "both-on-circle"
INNER_OUTER = "inner-outer"
DOUBLE_ZERO = "double-zero"
IDENTICALLY_ZERO = "identically-zero"


def discriminant_eval(dc, dr, w):
    return np.conj(dc) * w * w + 2 * dr * w + dc


@dataclass(frozen=True)
class RootReport:
    roots: tuple
    classification: str
    double: bool = False
    inner: Optional[complex] = None


def discriminant_roots(dc: complex, dr: float, tol: float = 1e-9) -> RootReport:
    """Roots of d(., t) and the trichotomy inner-outer / both-on-circle / double-zero.

    The larger root is computed first and the smaller one from the product
    w1 w2 = c'/conj(c'), which keeps the inner root accurate when |r'| >> |c'|.
    """
    dc = complex(dc)
    dr = float(dr)
    scale = abs(dc) + abs(dr)
    if scale == 0.0:
        return RootReport((), IDENTICALLY_ZERO)
    # roots are scale invariant; normalizing avoids underflow in |c'|^2
    dc, dr = dc / scale, dr / scale
    scale = 1.0
    if abs(dc) <= 1e-12 * abs(dr):
        if dc == 0:
            return RootReport((0j,), DOUBLE_ZERO, double=True, inner=0j)
        # leading coefficient negligible: linear equation, other root at infinity
        w = -dc / (2 * dr)
        return RootReport((w,), INNER_OUTER, inner=w)
    A = dc.conjugate()
    disc = np.sqrt(complex(dr * dr - abs(dc) ** 2))
    # q = -(B + sign * sqrt) / 2 with B = 2 r'; choose the sign avoiding cancellation
    sgn = 1.0 if (dr * disc).real >= 0 else -1.0
    q = -(dr + sgn * disc)
    w_big = q / A
    w_small = dc / q
    if abs(abs(dc) - abs(dr)) <= tol * scale:
        # classified as a double root on the circle; the reported pair stays
        # the computed one (about sqrt(tol) apart at worst)
        return RootReport((w_small, w_big), BOTH_ON_CIRCLE, double=True)
    if abs(dr) > abs(dc):
        return RootReport((w_small, w_big), INNER_OUTER, inner=w_small)
    return RootReport((w_small, w_big), BOTH_ON_CIRCLE)


def inner_root(dc: complex, dr: float) -> Optional[complex]:
    """Root of d(., t) strictly inside the unit disc, or None.

    None is also returned for an identically vanishing discriminant; call
    :func:`discriminant_roots` to tell the two cases apart.
    """
    return discriminant_roots(dc, dr).inner


@dataclass
class DiscriminantCloud:
    t: np.ndarray
    w: np.ndarray
    s: np.ndarray
    source: np.ndarray
    epsilon: float
    labels: np.ndarray
    meta: dict = field(default_factory=dict)

    @property
    def n_components(self) -> int:
        return int(self.labels.max()) + 1 if len(self.labels) else 0

    def components(self) -> list:
        return [np.flatnonzero(self.labels == k) for k in range(self.n_components)]

    def component_summary(self) -> list:
        out = []
        for k, idx in enumerate(self.components()):
            pts = self.s[idx]
            diam = float(np.max(np.abs(pts[:, None] - pts[None, :]))) if len(pts) < 4000 else _diameter(pts)
            out.append({"id": k, "size": int(len(idx)), "centroid": complex(pts.mean()), "diameter": diam})
        return out


def _diameter(pts):
    # bounding-box diagonal bounds the diameter from above within a factor sqrt(2)
    return float(np.hypot(np.ptp(pts.real), np.ptp(pts.imag)))


def label_components(points: np.ndarray, epsilon: float) -> np.ndarray:
    """Connected components of the epsilon-graph on complex points."""
    n = len(points)
    if n == 0:
        return np.zeros(0, dtype=int)
    xy = np.column_stack([points.real, points.imag])
    pairs = cKDTree(xy).query_pairs(epsilon, output_type="ndarray")
    graph = coo_matrix((np.ones(len(pairs)), (pairs[:, 0], pairs[:, 1])), shape=(n, n)) if len(pairs) else coo_matrix((n, n))
    _, labels = connected_components(graph, directed=False)
    return labels


def default_epsilon(s: np.ndarray) -> float:
    """Twice the median spacing of consecutive cloud points, with a relative floor."""
    floor = 1e-9 * max(1.0, float(np.max(np.abs(s)))) if len(s) else 1e-9
    if len(s) < 2:
        return floor
    return max(2.0 * float(np.median(np.abs(np.diff(s)))), floor)


def discriminant_set(chain: ChainSpec, t_grid, epsilon: Optional[float] = None,
                     tol: float = 1e-9) -> DiscriminantCloud:
    """Sample S(C): images c(t) + r(t) w of inner roots, plus closure points.

    Closure points are double roots (on the circle or at 0) and circle roots
    lying within ``5 sqrt(dt)`` of an inner root at a neighbouring grid point.
    """
    ts = np.asarray(t_grid, dtype=float)
    reports = []
    for t in ts:
        dc, dr = chain_derivatives(chain, float(t))
        reports.append(discriminant_roots(dc, dr, tol=tol))
    cs = np.asarray(chain.center_fn(ts), dtype=complex)
    rs = np.asarray(chain.radius_fn(ts), dtype=float)

    rows = []
    for i, rep in enumerate(reports):
        if rep.classification == IDENTICALLY_ZERO:
            continue
        if rep.inner is not None and abs(rep.inner) < 1:
            src = "double-zero" if rep.classification == DOUBLE_ZERO else "inner"
            rows.append((i, rep.inner, src))
        elif rep.double:
            rows.append((i, rep.roots[0], "double-circle"))
        elif rep.classification == BOTH_ON_CIRCLE:
            for j in (i - 1, i + 1):
                if not 0 <= j < len(reports) or reports[j].inner is None:
                    continue
                radius = 5 * np.sqrt(abs(ts[j] - ts[i]))
                for w in rep.roots:
                    if abs(w - reports[j].inner) < radius:
                        rows.append((i, w, "limit"))
                        break
                else:
                    continue
                break

    if rows:
        idx = np.array([r[0] for r in rows], dtype=int)
        w = np.array([r[1] for r in rows], dtype=complex)
        src = np.array([r[2] for r in rows])
        s = cs[idx] + rs[idx] * w
        t_out = ts[idx]
    else:
        t_out = np.zeros(0)
        w = np.zeros(0, dtype=complex)
        s = np.zeros(0, dtype=complex)
        src = np.zeros(0, dtype="<U13")
    eps = default_epsilon(s) if epsilon is None else float(epsilon)
    labels = label_components(s, eps)
    return DiscriminantCloud(t_out, w, s, src, eps, labels, meta={"n_grid": len(ts)})


@dataclass(frozen=True)
class ConditionStarReport:
    holds: bool
    epsilon: float
    n_components: int
    witness: Optional[int] = None


def condition_star(cloud: DiscriminantCloud, a: complex, b: complex,
                   epsilon: Optional[float] = None) -> ConditionStarReport:
    """Discretized (*): no epsilon-component reaches within epsilon of both a and b."""
    eps = cloud.epsilon if epsilon is None else float(epsilon)
    if len(cloud.s) == 0:
        return ConditionStarReport(True, eps, 0)
    labels = cloud.labels if epsilon is None else label_components(cloud.s, eps)
    near_a = np.abs(cloud.s - a) <= eps
    near_b = np.abs(cloud.s - b) <= eps
    n = int(labels.max()) + 1
    for k in range(n):
        mask = labels == k
        if np.any(near_a & mask) and np.any(near_b & mask):
            return ConditionStarReport(False, eps, n, witness=k)
    return ConditionStarReport(True, eps, n)


@dataclass(frozen=True)
class ChainRegime:
    regime: str
    min_speed_gap: float
    enclosure_violation: Optional[tuple] = None


def classify_chain(chain: ChainSpec, t_grid, max_pairs_grid: int = 2048,
                   tol: float = 1e-12) -> ChainRegime:
    """'noregular-eligible' iff |c'| > |r'| on the grid and no circle encloses another.

    Non-enclosure is checked pairwise on a subsample of at most
    ``max_pairs_grid`` points; pairs with a margin below 1e-9 are rechecked
    against the full-resolution neighbours of both parameters.
    """
    ts = np.asarray(t_grid, dtype=float)
    gaps = np.empty(len(ts))
    for i, t in enumerate(ts):
        dc, dr = chain_derivatives(chain, float(t))
        gaps[i] = abs(dc) - abs(dr)
    min_gap = float(gaps.min()) if len(ts) else 0.0
    if min_gap <= tol:
        return ChainRegime("main-only", min_gap)

    cs = np.asarray(chain.center_fn(ts), dtype=complex)
    rs = np.asarray(chain.radius_fn(ts), dtype=float)
    step = max(1, int(np.ceil(len(ts) / max_pairs_grid)))
    sub = np.arange(0, len(ts), step)
    near = []
    chunk = 256
    for lo in range(0, len(sub), chunk):
        rows = sub[lo:lo + chunk]
        dist = np.abs(cs[rows][:, None] - cs[sub][None, :])
        rmin = np.minimum(rs[rows][:, None], rs[sub][None, :])
        rmax = np.maximum(rs[rows][:, None], rs[sub][None, :])
        margin = dist + rmin - rmax
        margin[rows[:, None] == sub[None, :]] = np.inf
        bad = np.argwhere(margin < -tol)
        if len(bad):
            i, j = rows[bad[0, 0]], sub[bad[0, 1]]
            return ChainRegime("main-only", min_gap, (float(ts[i]), float(ts[j])))
        close = np.argwhere(margin < 1e-9)
        near.extend((rows[p], sub[q]) for p, q in close)
    for i, j in near:
        ii = np.arange(max(0, i - step), min(len(ts), i + step + 1))
        jj = np.arange(max(0, j - step), min(len(ts), j + step + 1))
        dist = np.abs(cs[ii][:, None] - cs[jj][None, :])
        rmin = np.minimum(rs[ii][:, None], rs[jj][None, :])
        rmax = np.maximum(rs[ii][:, None], rs[jj][None, :])
        margin = dist + rmin - rmax
        margin[ii[:, None] == jj[None, :]] = np.inf
        bad = np.argwhere(margin < -tol)
        if len(bad):
            return ChainRegime("main-only", min_gap,
                               (float(ts[ii[bad[0, 0]]]), float(ts[jj[bad[0, 1]]])))
    return ChainRegime("noregular-eligible", min_gap)
