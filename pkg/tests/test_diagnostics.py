import numpy as np
import pytest

from powertrap.covariance import ar1_model, sem_model
from powertrap.diagnostics import (
    alpha_star,
    full_grid,
    indistinguishability,
    trap_for_cliff_ord_and_poi,
)
from powertrap.errors import ConditionUnverifiable
from powertrap.invariant import build_b, make_test, t_b
from powertrap.linalg import residual_basis
from powertrap.montecarlo import null_montecarlo


def rsym(n, seed):
    rng = np.random.default_rng(seed)
    A = rng.uniform(0.1, 1.0, (n, n))
    A = A + A.T
    np.fill_diagonal(A, 0.0)
    return A


def no_x(n):
    return residual_basis(np.zeros((n, 0)))


def equal_weights(n):
    return np.ones((n, n)) - np.eye(n)


def test_alpha_star_top_and_bottom():
    m = sem_model(rsym(4, 0))
    v = m.sem.f_max
    d = no_x(4)
    r = alpha_star(make_test(np.outer(v, v), d), m)
    assert (r.alpha_star, r.trichotomy, r.eigen_evidence) == (0.0, "ZERO", "TOP")
    r = alpha_star(make_test(-np.outer(v, v), d), m)
    assert (r.alpha_star, r.trichotomy) == (1.0, "ONE")


def test_alpha_star_pure_sar_cliff_ord_is_zero():
    m = sem_model(rsym(5, 4))
    r = alpha_star(build_b(no_x(5), m, "CLIFF_ORD"), m)
    assert r.alpha_star == 0.0


def test_alpha_star_e_in_span():
    m = sem_model(rsym(4, 0))
    d = residual_basis(m.sem.f_max[:, None])
    r = alpha_star(build_b(d, m, "CLIFF_ORD"), m)
    assert (r.alpha_star, r.trichotomy) == (0.0, "E_IN_SPANX")


def test_alpha_star_interior_matches_null_monte_carlo():
    m = sem_model(rsym(4, 2))
    rng = np.random.default_rng(5)
    d = residual_basis(rng.standard_normal((4, 1)))
    t = build_b(d, m, "CLIFF_ORD")
    r = alpha_star(t, m)
    assert r.trichotomy == "INTERIOR" and 0 < r.alpha_star < 1
    assert r.kappa_star == pytest.approx(t_b(t, m.analytic_e))
    p, se = null_montecarlo(t, r.kappa_star, 400_000, seed=3)
    assert abs(p - r.alpha_star) <= 4 * se


def test_alpha_star_degenerate():
    m = sem_model(equal_weights(4))
    d = residual_basis(np.ones((4, 1)))
    r = alpha_star(build_b(d, m, "CLIFF_ORD"), m)
    assert r.trichotomy == "ONE" and r.eigen_evidence == "DEGENERATE"


def test_full_grid():
    g = full_grid(1.0)
    assert g[0] == 0 and np.all(np.diff(g) > 0) and g[-1] < 1


def test_trap_symmetric_and_equal_weights():
    for W in (rsym(5, 4), equal_weights(5)):
        m = sem_model(W)
        v = trap_for_cliff_ord_and_poi(m, no_x(5), 0.5 * m.a)
        assert v["cliff-ord"] and v["point-optimal"]
        assert v["details"]["f_max_eigvec_of_Wt"]


def test_trap_fails_when_f_not_left_eigvec():
    # row-normalized path: f_max = constant, W' has a non-constant Perron vector
    W = np.array([[0, 1, 0, 0], [0.5, 0, 0.5, 0], [0, 0.5, 0, 0.5], [0, 0, 1, 0.0]])
    m = sem_model(W)
    v = trap_for_cliff_ord_and_poi(m, no_x(4), 0.5 * m.a)
    assert not v["details"]["f_max_eigvec_of_Wt"]
    assert not v["cliff-ord"]


def test_trap_with_regressors_unverifiable():
    m = sem_model(rsym(5, 1))
    with pytest.raises(ConditionUnverifiable):
        trap_for_cliff_ord_and_poi(m, residual_basis(m.sem.f_max[:, None]), 0.5 * m.a)
    rng = np.random.default_rng(0)
    with pytest.raises(ConditionUnverifiable):
        trap_for_cliff_ord_and_poi(m, residual_basis(rng.standard_normal((5, 1))), 0.5 * m.a)


def test_indistinguishable_equal_weights():
    n = 6
    m = sem_model(equal_weights(n))
    rng = np.random.default_rng(1)
    X = np.column_stack([np.ones(n), rng.standard_normal(n)])
    rep = indistinguishability(m, residual_basis(X))
    assert rep.indistinguishable and rep.structural
    assert rep.structural_lambda == pytest.approx(-1.0)
    np.testing.assert_allclose(rep.delta, (1 + rep.grid) ** -2, atol=1e-10)


def test_distinguishable_ar1():
    m = ar1_model(5)
    rng = np.random.default_rng(2)
    rep = indistinguishability(m, residual_basis(rng.standard_normal((5, 1))))
    assert not rep.indistinguishable and rep.max_deviation > 1e-2
    assert rep.structural is None


def test_identity_at_zero():
    m = sem_model(rsym(4, 7))
    rep = indistinguishability(m, no_x(4), grid=[0.0])
    assert rep.delta[0] == pytest.approx(1.0) and rep.deviations[0] < 1e-12
