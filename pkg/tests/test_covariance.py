import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from powertrap.covariance import (
    ar1_model,
    concentration_direction,
    custom_model,
    decay_exponent,
    default_grid,
    dominant_eigenpair,
    example_model,
    limit_lambda,
    offdiag_check,
    sem_model,
    sigma_dot0,
)
from powertrap.errors import BadWeights, DimError, NotConcentrating, NotInjective


def random_sym_w(n, seed):
    rng = np.random.default_rng(seed)
    A = rng.random((n, n))
    W = A + A.T
    np.fill_diagonal(W, 0.0)
    return W


def test_sem_swap_matrix():
    m = sem_model([[0, 1], [1, 0]])
    assert m.sem.lambda_max == pytest.approx(1.0, abs=1e-14)
    np.testing.assert_allclose(m.analytic_e, [2**-0.5, 2**-0.5], atol=1e-12)
    assert m.a == pytest.approx(1.0)
    np.testing.assert_allclose(m.sigma(0.0), np.eye(2))


def test_sem_equal_weights():
    n = 5
    m = sem_model(np.ones((n, n)) - np.eye(n))
    assert m.sem.lambda_max == pytest.approx(n - 1, rel=1e-12)
    np.testing.assert_allclose(m.analytic_e, np.full(n, n**-0.5), atol=1e-10)


def test_sem_sigma_formula():
    W = random_sym_w(4, 1)
    m = sem_model(W)
    rho = 0.6 * m.a
    A = np.eye(4) - rho * W
    np.testing.assert_allclose(m.sigma(rho), np.linalg.inv(A.T @ A), rtol=1e-10)


@pytest.mark.parametrize("W", [
    [[1, 1], [1, 0]],                          # nonzero diagonal
    np.kron(np.eye(2), [[0, 1], [1, 0]]),      # repeated top eigenvalue
    np.zeros((3, 3)),
    [[0, 1], [0, 0]],                          # nilpotent: no positive eigenvalue
])
def test_sem_bad_weights(W):
    with pytest.raises(BadWeights):
        sem_model(W)


def test_dominant_eigenpair_nonsymmetric_bipartite():
    # eigenvalues +-sqrt(2): plain power iteration would oscillate
    W = np.array([[0, 1, 0], [1, 0, 1], [0, 1, 0]]) * np.array([1.0, 1.0, 1.0])
    W = W / W.sum(axis=1, keepdims=True)
    lam, f = dominant_eigenpair(W)
    assert lam == pytest.approx(1.0, abs=1e-12)
    np.testing.assert_allclose(W @ f, lam * f, atol=1e-10)
    assert np.all(f > 0)


@settings(max_examples=15, deadline=None)
@given(st.integers(2, 8), st.integers(0, 10_000))
def test_sem_symmetric_properties(n, seed):
    W = random_sym_w(n, seed)
    m = sem_model(W)
    f, lam = m.analytic_e, m.sem.lambda_max
    assert np.all(f > 0)  # Perron vector after sign fixing
    for rho in (0.1 * m.a, 0.5 * m.a, 0.9 * m.a):
        S = m.sigma(rho)
        np.testing.assert_allclose(S, np.linalg.matrix_power(np.linalg.inv(np.eye(n) - rho * W), 2),
                                   rtol=1e-8, atol=1e-10)
        np.testing.assert_allclose(S @ f, (1 - rho * lam) ** -2 * f, rtol=1e-8)


@settings(max_examples=15, deadline=None)
@given(st.integers(2, 10), st.integers(0, 10_000))
def test_sem_closed_form_matches_numeric_route(n, seed):
    m = sem_model(random_sym_w(n, seed))
    numeric = custom_model(m.sigma_fn, m.a, n, e=m.analytic_e, c=lambda r: 1.0)
    L1 = limit_lambda(m)
    L2 = limit_lambda(numeric)
    assert np.abs(L1 - L2).max() <= 1e-4
    np.testing.assert_allclose(L1, L1.T, atol=1e-10)


@settings(max_examples=20, deadline=None)
@given(st.integers(2, 6), st.integers(0, 10_000))
def test_sem_identifiable(n, seed):
    rng = np.random.default_rng(seed)
    m = sem_model(random_sym_w(n, seed))
    r1, r2 = rng.uniform(0, 0.95 * m.a, 2)
    s1, s2 = rng.uniform(0.2, 3, 2)
    if abs(r1 - r2) < 1e-6 and abs(s1 - s2) < 1e-6:
        return
    diff = np.abs(s1**2 * m.sigma(r1) - s2**2 * m.sigma(r2)).max()
    assert diff > 1e-8


def test_sem_limit_swap_matrix():
    # by hand: P = I - ff', P W = -P, (I + P)^{-1} = I - P/2, minus ff'
    L = limit_lambda(sem_model([[0, 1], [1, 0]]))
    np.testing.assert_allclose(L, [[0.25, -0.25], [-0.25, 0.25]], atol=1e-12)


def test_ar1_entries():
    m = ar1_model(3, "I")
    np.testing.assert_allclose(m.sigma(0.5), [[1, .5, .25], [.5, 1, .5], [.25, .5, 1]])
    m2 = ar1_model(2, "II")
    assert m2.sigma(0.5)[0, 1] == pytest.approx(-0.5)
    np.testing.assert_allclose(ar1_model(6).sigma(0.0), np.eye(6))
    np.testing.assert_allclose(m2.analytic_e, [-2**-0.5, 2**-0.5])
    with pytest.raises(DimError):
        ar1_model(1)


@pytest.mark.parametrize("n", [3, 5, 10])
@pytest.mark.parametrize("case", ["I", "II"])
def test_ar1_scaling_exponent_is_one(n, case):
    # ||P Sigma P|| ~ (1 - rho)^1 on [0.9, 0.9999], so c(rho) = (1-rho)^(-1/2)
    grid = 1 - np.geomspace(0.1, 1e-4, 20)
    assert decay_exponent(ar1_model(n, case), grid) == pytest.approx(1.0, abs=0.01)


def test_ar1_limit_matrix_is_injective():
    m = ar1_model(5)
    L = limit_lambda(m)
    np.testing.assert_allclose(L @ m.analytic_e, 0, atol=1e-6)


def test_examples():
    ex1 = example_model("EX1", 2, e=[0, 1])
    np.testing.assert_allclose(ex1.sigma(0.5), np.diag([1.0, 2.0]))
    ex2 = example_model("EX2", 2, gamma=0.3)
    np.testing.assert_allclose(ex2.sigma(0.0), np.eye(2))
    with pytest.raises(DimError):
        example_model("EX2", 3)
    st_ = example_model("STRETCH", 2)
    chk = concentration_direction(st_)
    assert chk.passed
    np.testing.assert_allclose(chk.e_hat, [1, 0], atol=1e-12)


def test_concentration_sem_and_ar1():
    chk = concentration_direction(sem_model([[0, 1], [1, 0]]))
    assert chk.passed
    np.testing.assert_allclose(chk.e_hat, [2**-0.5, 2**-0.5], atol=1e-8)
    chk = concentration_direction(ar1_model(4))
    assert chk.passed
    np.testing.assert_allclose(chk.e_hat, [0.5] * 4, atol=1e-4)
    assert np.all(np.diff(chk.residuals[-3:]) <= 0)


def test_not_concentrating():
    flat = custom_model(lambda r: np.diag([1.0, 1.0 + 0 * r]), 1.0, 2)
    with pytest.raises(NotConcentrating):
        concentration_direction(flat)


def test_default_grid():
    g = default_grid(0.5)
    assert g[0] == pytest.approx(0.5 * (1 - 2**-4))
    assert g[-1] == pytest.approx(0.5 * (1 - 2**-16))
    assert len(g) == 13


def test_offdiag():
    W = random_sym_w(5, 3)
    assert offdiag_check(sem_model(W))
    assert offdiag_check(ar1_model(4))
    rng = np.random.default_rng(0)
    e = rng.standard_normal(4)
    assert offdiag_check(example_model("EX1", 4, e=e))


def test_offdiag_fails_for_rotating_direction():
    # Sigma = R(rho) diag(1/(1-rho), 1) R(rho)' with the direction rotating
    # at a rate that keeps the cross block from vanishing
    def sig(r):
        t = 0.5 * np.log1p(-r) * -0.05
        R = np.array([[np.cos(t), -np.sin(t)], [np.sin(t), np.cos(t)]])
        return R @ np.diag([1 / (1 - r), 1.0]) @ R.T

    m = custom_model(sig, 1.0, 2, e=[1.0, 0.0], c=lambda r: 1.0)
    assert not offdiag_check(m)


def test_sigma_dot0():
    W = np.array([[0, 1, 0], [1, 0, 1], [0, 1, 0.]])
    m = sem_model(W)
    np.testing.assert_allclose(sigma_dot0(m), W + W.T)
    # finite difference at step 1e-6 (tests/oracles/generate.py)
    fd = [[3e-06, 2.0, 3e-06], [2.0, 6e-06, 2.0], [3e-06, 2.0, 3e-06]]
    np.testing.assert_allclose(sigma_dot0(m), fd, atol=1e-4)
    generic = custom_model(m.sigma_fn, m.a, 3)
    np.testing.assert_allclose(sigma_dot0(generic), W + W.T, atol=1e-6)
    band = (np.abs(np.subtract.outer(range(4), range(4))) == 1).astype(float)
    np.testing.assert_array_equal(sigma_dot0(ar1_model(4)), band)
    np.testing.assert_allclose(sigma_dot0(custom_model(ar1_model(4).sigma_fn, 1.0, 4)),
                               band, atol=1e-8)


def test_not_injective():
    # the limit of P Sigma P has rank one on the 2-dimensional complement of e
    e, u = np.array([0, 0, 1.0]), np.array([0, 1.0, 0])

    def sig(r):
        return np.eye(3) + r / (1 - r) * np.outer(e, e) - r * np.outer(u, u)

    m = custom_model(sig, 1.0, 3, e=e, c=lambda r: 1.0)
    with pytest.raises(NotInjective):
        limit_lambda(m)
