import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from powertrap.covariance import ar1_model, sem_model
from powertrap.errors import ModelMismatch
from powertrap.invariant import (
    build_b,
    make_test,
    maximal_invariant,
    region_classify,
    t_b,
    t_b_many,
)
from powertrap.linalg import residual_basis

SWAP = [[0.0, 1.0], [1.0, 0.0]]


def no_x(n):
    return residual_basis(np.zeros((n, 0)))


def random_instance(seed, n=6, k=2):
    rng = np.random.default_rng(seed)
    d = residual_basis(rng.standard_normal((n, k)))
    B = rng.standard_normal((n - k, n - k))
    return rng, d, make_test(B + B.T, d)


def test_t_b_examples():
    m = sem_model(SWAP)
    t = build_b(no_x(2), m, "CLIFF_ORD")
    assert t_b(t, [1.0, 1.0]) == pytest.approx(2.0)
    d = residual_basis(np.array([[1.0], [1.0], [0.0]]))
    t = make_test(np.eye(2), d)
    assert t_b(t, [1.0, 2.0, 3.0]) == pytest.approx(1.0)
    B = np.diag([-1.0, 3.0])
    t = make_test(B, d)
    assert t_b(t, [2.0, 2.0, 0.0]) == t.lmin


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000))
def test_t_b_invariance_and_range(seed):
    rng, d, t = random_instance(seed)
    y = rng.standard_normal(6)
    base = t_b(t, y)
    for g in (-3.0, 0.5, 7.0):
        theta = rng.standard_normal(2)
        v = t_b(t, g * y + d.X @ theta)
        assert v == pytest.approx(base, rel=1e-9, abs=1e-12)
    Y = rng.standard_normal((200, 6))
    vals = t_b_many(t, Y)
    assert np.all(vals >= t.lmin) and np.all(vals <= t.lmax)
    np.testing.assert_allclose(vals[:5], [t_b(t, y) for y in Y[:5]], rtol=1e-12)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000))
def test_t_b_independent_of_basis(seed):
    rng, d, t = random_instance(seed)
    Q, _ = np.linalg.qr(rng.standard_normal((4, 4)))
    # another valid residual basis U C, paired with U B U'
    from powertrap.linalg import Design

    d2 = Design(d.X, Q @ d.C, d.P_perp)
    t2 = make_test(Q @ t.B @ Q.T, d2)
    y = rng.standard_normal(6)
    assert t_b(t2, y) == pytest.approx(t_b(t, y), abs=1e-10)


def test_build_b_variants():
    W = np.array([[0, 1, 0], [1, 0, 1], [0, 1, 0.]])
    m = sem_model(W)
    d = no_x(3)
    np.testing.assert_allclose(build_b(d, m, "LOCALLY_BEST").B, W + W.T)
    np.testing.assert_allclose(build_b(d, m, "CLIFF_ORD").B, W + W.T)
    band = (np.abs(np.subtract.outer(range(4), range(4))) == 1).astype(float)
    np.testing.assert_allclose(build_b(no_x(4), ar1_model(4), "LOCALLY_BEST").B, band)
    po = build_b(d, m, "POINT_OPTIMAL", rho_bar=0.3 * m.a)
    A = np.eye(3) - 0.3 * m.a * W
    np.testing.assert_allclose(po.B, -(A.T @ A), rtol=1e-10)
    with pytest.raises(ModelMismatch):
        build_b(no_x(4), ar1_model(4), "CLIFF_ORD")
    with pytest.raises(ModelMismatch):
        build_b(d, m, "POINT_OPTIMAL", rho_bar=m.a)


def test_point_optimal_at_identity_is_minus_identity():
    from powertrap.covariance import custom_model

    m = custom_model(lambda r: np.eye(3) + r * 0 + np.diag([0, 0, r**2 / (1 - r)]), 1.0, 3)
    # Sigma(0.0) is I; use a model that stays at I up to rho_bar
    flat = custom_model(lambda r: np.eye(3) + np.diag([0, 0, max(r - 0.5, 0) / (1 - r)]), 1.0, 3)
    t = build_b(no_x(3), flat, "POINT_OPTIMAL", rho_bar=0.25)
    np.testing.assert_allclose(t.B, -np.eye(3))
    assert t.degenerate
    del m


def test_region_classify():
    d = residual_basis(np.array([[1.0], [0.0], [0.0]]))
    t = make_test(np.diag([0.0, 2.0]), d)
    assert region_classify(t, 1.0, [3.0, 0, 0]).location == "BOUNDARY"
    assert region_classify(t, 1.0, [3.0, 0, 0]).reason == "SPAN_X"
    t0 = make_test(np.diag([0.0, 2.0]), no_x(2))
    p = region_classify(t0, 1.0, [1.0, 1.0])
    assert (p.location, p.reason) == ("BOUNDARY", "LEVEL_SET")
    assert region_classify(t0, 1.0, [0.0, 1.0]).location == "INTERIOR"
    assert region_classify(t0, 1.0, [1.0, 0.0]).location == "EXTERIOR"
    assert region_classify(t0, -1.0, [1.0, 0.0]).reason == "TRIVIAL_REGION"
    assert region_classify(t0, 2.0, [0.0, 1.0]).location == "EXTERIOR"


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000))
def test_region_at_own_level(seed):
    rng, d, t = random_instance(seed)
    e = rng.standard_normal(6)
    k = t_b(t, e)
    p = region_classify(t, k, e)
    if k < t.lmax:
        assert p.location == "BOUNDARY"
    x = d.X @ rng.standard_normal(2)
    assert region_classify(t, 0.5 * (t.lmin + t.lmax), x).reason == "SPAN_X"


def test_maximal_invariant():
    d = residual_basis(np.array([[1.0], [1.0], [1.0]]))
    np.testing.assert_array_equal(maximal_invariant(d, [2.0, 2.0, 2.0]), 0)
    np.testing.assert_allclose(maximal_invariant(no_x(2), [-2.0, 0.0]), [1.0, 0.0])
    np.testing.assert_array_equal(maximal_invariant(no_x(2), [0.0, 0.0]), 0)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000), st.floats(-5, 5).filter(lambda g: abs(g) > 1e-3))
def test_maximal_invariant_is_invariant(seed, g):
    rng, d, _ = random_instance(seed)
    y = rng.standard_normal(6)
    v1 = maximal_invariant(d, y)
    v2 = maximal_invariant(d, g * y + d.X @ rng.standard_normal(2))
    np.testing.assert_allclose(v1, v2, atol=1e-9)
    assert np.linalg.norm(v1) == pytest.approx(1.0)
