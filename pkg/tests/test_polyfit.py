import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from polychain import polyfit
from polychain.errors import ConditioningError, DomainError, InconsistencyError
from polychain.functions import builtin

Z = polyfit.annulus_samples(600, 0.3, 0.9, seed=3)

coef = st.builds(complex, st.floats(-2, 2), st.floats(-2, 2))


@settings(max_examples=25, deadline=None)
@given(st.lists(coef, min_size=6, max_size=6))
def test_exact_recovery(cs):
    comps = np.zeros((2, 4), dtype=complex)
    comps[0, :3] = cs[:3]
    comps[1, :3] = cs[3:]
    dec = polyfit.PolyDecomposition(1, "euclidean", comps, 0.0)
    vals = dec(Z)
    if np.max(np.abs(vals)) < 1e-6:
        return
    fitd = polyfit.fit(Z, vals, 1, 3)
    assert np.allclose(fitd.components, comps, atol=1e-8)
    assert fitd.residual < 1e-10


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10**6))
def test_residual_nonincreasing_in_order(seed):
    z = polyfit.annulus_samples(400, 0.3, 0.9, seed=seed % 97)
    f = np.exp(np.conj(z)) * (1 + z)
    res = [polyfit.fit(z, f, nu, 4, seed=0).train_residual for nu in range(4)]
    assert all(b <= a + 1e-12 for a, b in zip(res[:-1], res[1:]))


def test_least_squares_optimality(rng):
    z = Z
    f = np.exp(np.conj(z))
    dec = polyfit.fit(z, f, 1, 4, val_frac=0.2, seed=0)
    tr, _ = polyfit._split(len(z), 0.2, 0)
    A = polyfit.design_matrix(z[tr], 1, 4)
    r = A @ dec.components.ravel() - f[tr]
    # normal equations: residual orthogonal to the columns
    assert np.max(np.abs(A.conj().T @ r)) < 1e-8 * np.linalg.norm(A) * np.linalg.norm(f[tr])


def test_wrong_order_leaves_residual():
    f = np.conj(Z) ** 2
    assert polyfit.fit(Z, f, 1, 6).residual > 0.1


def test_conditioning_guard():
    z = np.linspace(0.5, 0.5001, 200) + 0j
    with pytest.raises(ConditioningError):
        polyfit.fit(z, z, 2, 8)


def test_hyperbolic_domain():
    with pytest.raises(DomainError):
        polyfit.fit(np.array([0.1, 0.5, 1.2] * 40) + 0j, np.ones(120), 0, 2, form="hyperbolic")


def test_hyperbolic_fit_of_inverse_defect():
    f = 1 / (1 - np.abs(Z) ** 2)
    dec = polyfit.fit(Z, f, 1, 4, form="hyperbolic")
    assert abs(dec.components[1, 0] - 1) < 1e-8 and np.max(np.abs(dec.components[0])) < 1e-8


def test_euclidean_to_hyperbolic_roundtrip():
    s = 1 - np.abs(Z) ** 2
    F = 1 + Z / s + 0.5 * Z**2 / s**2
    G = F * s**2
    dec = polyfit.fit(Z, G, 2, 6)
    hyp = polyfit.euclidean_to_hyperbolic(dec)
    assert np.max(np.abs(hyp(Z) - F)) < 1e-8


def test_euclidean_to_hyperbolic_inconsistent():
    dec = polyfit.fit(Z, np.conj(Z), 1, 3)
    with pytest.raises(InconsistencyError):
        polyfit.euclidean_to_hyperbolic(dec)
    loose = polyfit.euclidean_to_hyperbolic(dec, strict=False)
    s = 1 - np.abs(Z) ** 2
    assert np.max(np.abs(loose(Z) - np.conj(Z) / s)) < 1e-8


def test_json_roundtrip(tmp_path):
    dec = polyfit.fit(Z, builtin("poly_mix")(Z), 1, 4)
    path = tmp_path / "dec.json"
    polyfit.save(dec, path)
    back = polyfit.load(path)
    assert np.allclose(back(Z), dec(Z), atol=1e-14)
    assert json.loads(path.read_text())["order"] == 1


@pytest.mark.parametrize("fid", ["conj", "abs2", "conj_sq", "analytic_p", "poly_mix"])
def test_order_detect_small(fid):
    fn = builtin(fid)
    assert polyfit.order_detect(Z, fn(Z), nu_max=4, D=6).order == fn.declared_order


def test_truncation_vs_structural_residual():
    f = np.exp(np.conj(Z))
    det = polyfit.order_detect(Z, f, nu_max=3, D=6)
    assert det.order is None
    assert det.truncation_residual == det.residuals[-1] and det.truncation_residual < det.residuals[0]


def test_extrapolation_report():
    fn = builtin("poly_mix")
    dec = polyfit.fit(Z, fn(Z), 1, 4)
    rep = polyfit.extrapolation_error(dec, fn, [0.1, 1.5])
    assert [r["radius"] for r in rep] == [0.1, 1.5]
    assert all(r["rel_error"] < 1e-10 for r in rep)
