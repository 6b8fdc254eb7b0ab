import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from polychain.chains import CircleT, t_grid
from polychain.dynamics import (I_of_q, branchset_from_curves, cauchy_polyline, count_traveling,
                                extension_winding, polynomial_roots, roots_inside, track_branches,
                                verify_zp_balance, winding_mismatches, winding_number)
from polychain.errors import ConditioningError, ExtendibilityError, ZeroFunctionError
from polychain.functions import builtin
from polychain.laurent import analyze_circle, build_extension

roots_in_disc = st.lists(st.builds(lambda r, a: r * np.exp(1j * a), st.floats(0.0, 0.95), st.floats(0, 6.28)),
                         min_size=1, max_size=6)


@settings(max_examples=50)
@given(roots_in_disc)
def test_polynomial_roots_recovered(rs):
    # keep roots separated so multiplicities are unambiguous
    rs = np.asarray(rs)
    if len(rs) > 1 and np.min(np.abs(rs[:, None] - rs[None, :]) + 10 * np.eye(len(rs))) < 1e-2:
        return
    coeffs = np.polynomial.polynomial.polyfromroots(rs)
    found = polynomial_roots(coeffs)
    assert sum(m for _, m in found) == len(rs)
    for r in rs:
        assert min(abs(w - r) for w, _ in found) < 1e-6


def test_multiplicity_and_center_zero():
    found = dict((round(w.real, 6) + 1j * round(w.imag, 6), m)
                 for w, m in polynomial_roots(np.polynomial.polynomial.polyfromroots([0, 0, 0.5, 0.5])))
    assert found[0j] == 2 and found[0.5 + 0j] == 2
    with pytest.raises(ZeroFunctionError):
        polynomial_roots(np.zeros(4))


@settings(max_examples=40)
@given(st.lists(st.builds(lambda r, a: r * np.exp(1j * a), st.floats(0.0, 2.0), st.floats(0, 6.28)),
                min_size=1, max_size=5))
def test_winding_counts_zeros_inside(rs):
    rs = np.asarray(rs)
    if np.any(np.abs(np.abs(rs) - 1) < 0.05):
        return
    w = np.exp(2j * np.pi * np.arange(512) / 512)
    vals = np.prod(w[:, None] - rs[None, :], axis=1)
    assert winding_number(vals) == int(np.sum(np.abs(rs) < 1))


@settings(max_examples=30, deadline=None)
@given(st.builds(complex, st.floats(-1, 1), st.floats(-1, 1)), st.floats(0.1, 1.0))
def test_winding_equals_zeros_minus_poles(c, r):
    for fid, nu in (("conj", 1), ("conj_sq_z", 2), ("conj_h", 1)):
        ext = build_extension(analyze_circle(builtin(fid), CircleT(c, r, 0.0), 256), nu)
        rs = roots_inside(ext)
        if rs.boundary:
            continue
        assert extension_winding(ext) == rs.n_zeros - rs.pole_order


def test_conj_root_is_reflection():
    # conj extension conj(c) + r^2/(z - c) vanishes at c - r^2/conj(c)
    c, r = 0.6 + 0.3j, 0.4
    ext = build_extension(analyze_circle(np.conj, CircleT(c, r, 0.0), 256), 1)
    rs = roots_inside(ext)
    z0 = c - r**2 / np.conj(c)
    assert len(rs.roots) == 1 and abs(c + r * rs.roots[0][0] - z0) < 1e-12
    assert rs.pole_order == 1


@pytest.mark.parametrize("fid,nu,expected", [("conj", 1, (1, 1)), ("conj_sq", 2, (2, 2)), ("abs2", 1, (1, 1)),
                                             ("conj_h", 1, (1, 1)), ("analytic_p", 0, (0, 0))])
def test_tracking_on_unit_disc_chains(all_chains, fid, nu, expected):
    for name in ("hyperbolic", "mixed"):
        ch = all_chains[name]
        bs = track_branches(ch, builtin(fid), nu, t_grid(ch, 128))
        assert count_traveling(bs) == expected, name
        assert winding_mismatches(bs) == []


def test_tracking_rejects_non_extendible(hyperbolic):
    with pytest.raises(ExtendibilityError):
        track_branches(hyperbolic, builtin("conj_sq"), 1, t_grid(hyperbolic, 32))


def test_cauchy_polyline():
    th = np.linspace(0, 2 * np.pi, 2001)
    loop = np.exp(1j * th)
    assert abs(cauchy_polyline(loop, 0.0, margin=0) - 2j * np.pi) < 1e-12
    assert abs(cauchy_polyline(loop, 3.0)) < 1e-12
    with pytest.raises(ConditioningError):
        cauchy_polyline(loop, 1.05)


def test_balance_for_closed_form_branches():
    ts = np.linspace(0, 1, 400)
    a, b = 0.3, -0.4 + 0.2j
    path = a + (b - a) * ts + 0.2j * np.sin(np.pi * ts)
    bs = branchset_from_curves([(path, 1)], [(a + (b - a) * ts, 1)], a, b, ts)
    rep = verify_zp_balance(bs, [3, 3j, -3, 2 + 2j])
    assert rep.passed and rep.max_abs < 1e-12
    # unbalanced: one extra traveling zero
    bs2 = branchset_from_curves([(path, 2)], [(a + (b - a) * ts, 1)], a, b, ts)
    assert not verify_zp_balance(bs2, [3]).passed


def test_iq_small_for_analytic(hyperbolic):
    res = I_of_q(hyperbolic, builtin("analytic_p"), 0, 3.0, n_theta=64, n_t=64)
    assert abs(res.value) < 1e-3 and res.excluded_fraction == 0


def test_merge_intervals_flag_persistent_double_zero(linear):
    from polychain.dynamics import merge_intervals
    ts = t_grid(linear, 64)
    merged = merge_intervals(track_branches(linear, builtin("conj_sq"), 2, ts))
    assert merged and all(m["cluster"] == 2 for m in merged)
    assert merge_intervals(track_branches(linear, builtin("conj"), 1, ts)) == []
