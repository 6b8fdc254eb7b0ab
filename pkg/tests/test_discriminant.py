import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from polychain import segment_tracing_chain
from polychain.chains import discriminant_grid, t_grid
from polychain.discriminant import (BOTH_ON_CIRCLE, DOUBLE_ZERO, IDENTICALLY_ZERO, INNER_OUTER, classify_chain,
                                    condition_star, discriminant_eval, discriminant_roots, discriminant_set,
                                    label_components)

cplx = st.builds(complex, st.floats(-5, 5), st.floats(-5, 5))


@settings(max_examples=1000)
@given(cplx, st.floats(-5, 5))
def test_roots_solve_and_multiply_to_unimodular(dc, dr):
    rep = discriminant_roots(dc, dr)
    if rep.classification == IDENTICALLY_ZERO:
        assert dc == 0 and dr == 0
        return
    for w in rep.roots:
        if abs(w) <= 1:
            assert abs(discriminant_eval(dc, dr, w)) <= 1e-10 * (abs(dc) + 2 * abs(dr) + 1)
    if len(rep.roots) == 2 and dc != 0:
        assert abs(abs(rep.roots[0]) * abs(rep.roots[1]) - 1) < 1e-10


@settings(max_examples=1000)
@given(cplx, st.floats(-5, 5))
def test_trichotomy(dc, dr):
    rep = discriminant_roots(dc, dr)
    if abs(dc) == 0 and dr == 0:
        assert rep.classification == IDENTICALLY_ZERO
    elif rep.classification == INNER_OUTER:
        assert abs(dr) > abs(dc) and abs(rep.inner) < 1
    elif rep.classification == BOTH_ON_CIRCLE:
        assert all(abs(abs(w) - 1) < 1e-6 for w in rep.roots)


def test_special_cases():
    assert discriminant_roots(0, 1).classification == DOUBLE_ZERO
    assert discriminant_roots(0, 0).classification == IDENTICALLY_ZERO
    rep = discriminant_roots(1, 1)
    assert rep.double and abs(rep.roots[0] + 1) < 1e-12
    # extreme scale ratio keeps the small root accurate
    rep = discriminant_roots(1e-10, 1.0)
    assert abs(rep.inner + 0.5e-10) < 1e-20


def test_components_of_two_clusters(rng):
    pts = np.concatenate([rng.normal(size=50) * 1e-3 + 1j * rng.normal(size=50) * 1e-3,
                          5 + rng.normal(size=50) * 1e-3])
    labels = label_components(pts, 0.1)
    assert len(set(labels)) == 2


@pytest.mark.parametrize("name", ["hyperbolic", "horicycle", "mixed"])
def test_cloud_is_the_endpoints(all_chains, name):
    ch = all_chains[name]
    cloud = discriminant_set(ch, discriminant_grid(ch, 512))
    assert cloud.n_components == 2
    star = condition_star(cloud, ch.endpoint_a, ch.endpoint_b)
    assert star.holds


def test_segment_chain_violates_condition_star():
    ch = segment_tracing_chain()
    cloud = discriminant_set(ch, discriminant_grid(ch, 1024))
    star = condition_star(cloud, ch.endpoint_a, ch.endpoint_b)
    assert not star.holds and star.witness is not None


def test_classification(hyperbolic):
    assert classify_chain(hyperbolic, t_grid(hyperbolic, 128)).regime == "main-only"


def _chain(center, dcenter, radius, dradius, a=None, b=None):
    from polychain.chains import ChainPiece, ChainSpec
    a = complex(center(0.0)) if a is None else a
    b = complex(center(1.0)) if b is None else b
    return ChainSpec((ChainPiece(0.0, 1.0, center, radius, dcenter, dradius),), a, b)


def test_translating_chain_is_noregular_eligible():
    ch = _chain(lambda t: 3 * np.asarray(t) + 0j, lambda t: 3 + 0 * np.asarray(t) + 0j,
                lambda t: np.asarray(t) * (1 - np.asarray(t)), lambda t: 1 - 2 * np.asarray(t))
    ts = np.linspace(1e-3, 1 - 1e-3, 10_000)
    assert classify_chain(ch, ts).regime == "noregular-eligible"


def test_concentric_chain_is_main_only():
    ch = _chain(lambda t: 0 * np.asarray(t) + 0j, lambda t: 0 * np.asarray(t) + 0j,
                lambda t: np.asarray(t) * (1 - np.asarray(t)) + 0.1, lambda t: 1 - 2 * np.asarray(t),
                a=0j, b=1e-9 + 0j)  # endpoints nominal; only the regime is under test
    assert classify_chain(ch, np.linspace(0.01, 0.99, 200)).regime == "main-only"


@settings(max_examples=20, deadline=None)
@given(st.floats(0.01, 0.99), st.floats(0.01, 0.99))
def test_inner_roots_map_inside_circle(t, _):
    from polychain.chains import chain_derivatives
    ch = segment_tracing_chain()
    dc, dr = chain_derivatives(ch, t)
    rep = discriminant_roots(dc, dr)
    if rep.inner is not None:
        s = ch.center_fn(t) + ch.radius_fn(t) * rep.inner
        assert abs(s - ch.center_fn(t)) <= ch.radius_fn(t) + 1e-12
