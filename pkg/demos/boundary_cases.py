"""
Three boundary cases
====================

When the concentration direction ``e`` lies exactly on the boundary of the
rejection region, the limit depends on finer structure. Three cases are
settled: ``e`` inside span(X), ``C e`` an eigenvector of ``B``, and the
generic case where the limit is one half.
"""

import numpy as np

from powertrap.covariance import ar1_model, sem_model
from powertrap.invariant import build_b, make_test, t_b
from powertrap.limits import classify_limit
from powertrap.linalg import residual_basis
from powertrap.montecarlo import SimConfig, estimate_rejection
from powertrap.quadform import critical_value

cfg = SimConfig(reps=50_000, seed=3)

rng = np.random.default_rng(1)
A = rng.uniform(0.1, 1.0, (5, 5))
W = A + A.T
np.fill_diagonal(W, 0)
model = sem_model(W)
rho = model.a * (1 - 2.0**-12)


def show(label, test, kappa, model, rho):
    lim = classify_limit(test, kappa, model)
    p, se = estimate_rejection(test, kappa, model, rho, cfg)
    print(f"{label:<28} {lim.case:<20} limit={lim.limit!s:<8.6} simulated={p:.4f} +- {se:.4f}")


###############################################################################
# ``e`` in span(X): the limit is a Gaussian probability in (0, 1).

d = residual_basis(model.sem.f_max[:, None])
test = build_b(d, model, "CLIFF_ORD")
show("f_max in X, alpha=0.3", test, critical_value(test, 0.3), model, rho)

###############################################################################
# Generic boundary: the limit is exactly 1/2, for SEM and AR(1) alike.

d = residual_basis(rng.standard_normal((5, 1)))
test = build_b(d, model, "CLIFF_ORD")
show("SEM, kappa = T_B(e)", test, t_b(test, model.analytic_e), model, rho)
ar = ar1_model(5)
test = build_b(d, ar, "LOCALLY_BEST")
show("AR(1), kappa = T_B(e)", test, t_b(test, ar.analytic_e), ar, ar.a * (1 - 2.0**-12))

###############################################################################
# Eigenvector boundary: put ``e`` on a chosen eigenvalue of ``B``.

f = model.sem.f_max
Q, _ = np.linalg.qr(np.column_stack([f, rng.standard_normal((5, 4))]))
for lam in (0.3, -3.0):
    B = (Q * [lam, -1.0, 1.0, -0.5, 2.0]) @ Q.T
    test = make_test(B, residual_basis(np.zeros((5, 0))))
    show(f"eigenvalue {lam:+.1f}", test, lam, model, rho)
