"""
When does a test lose all its power?
====================================

Under a spatial error model the covariance of ``y`` collapses onto a single
direction as the autocorrelation approaches its upper limit. A test of the
form ``T_B > kappa`` then has power close to 1 or close to 0, depending on
which side of the region boundary that direction sits.

This script builds a weights matrix, runs the Cliff-Ord test with and
without regressors and compares the analytic limit with simulation.
"""

import numpy as np

from powertrap.covariance import sem_model
from powertrap.diagnostics import alpha_star
from powertrap.invariant import build_b, t_b
from powertrap.limits import classify_limit
from powertrap.linalg import residual_basis
from powertrap.montecarlo import SimConfig, power_curve
from powertrap.quadform import critical_value

REPS = 20_000

# A small ring of six regions, each linked to its two neighbours.
n = 6
W = np.zeros((n, n))
for i in range(n):
    W[i, (i + 1) % n] = W[(i + 1) % n, i] = 1.0
model = sem_model(W)
print(f"a = 1/lambda_max(W) = {model.a:.4f}")

###############################################################################
# No regressors
# -------------
# With ``k = 0`` and symmetric ``W`` the Cliff-Ord test has limiting power
# 1 at every size.

design = residual_basis(np.zeros((n, 0)))
test = build_b(design, model, "CLIFF_ORD")
kappa = critical_value(test, 0.05)
lim = classify_limit(test, kappa, model)
print(f"k=0: T_B(e) = {lim.t_b_e:.3f} > kappa = {kappa:.3f}, limit {lim.limit}")

###############################################################################
# An intercept
# ------------
# On a ring the concentration direction is the constant vector, so an
# intercept absorbs it. The limit is then a Gaussian probability strictly
# between 0 and 1.

rng = np.random.default_rng(0)
d = residual_basis(np.column_stack([np.ones(n), rng.standard_normal(n)]))
test = build_b(d, model, "CLIFF_ORD")
kappa = critical_value(test, 0.05)
lim = classify_limit(test, kappa, model)
print(f"intercept + 1 regressor: case {lim.case}, limit {lim.limit:.4f}")

###############################################################################
# Generic regressors
# ------------------
# Now ``e`` is off span(X) and the limit is 0 or 1. Which one depends on the
# size: below alpha* the test is trapped, above it the power tends to 1.

X = rng.standard_normal((n, 2))
d = residual_basis(X)
test = build_b(d, model, "CLIFF_ORD")
rep = alpha_star(test, model)
print(f"generic X: alpha* = {rep.alpha_star:.4f} ({rep.trichotomy})")
for alpha in (0.5 * rep.alpha_star, min(0.99, 2 * rep.alpha_star)):
    kappa = critical_value(test, alpha)
    lim = classify_limit(test, kappa, model)
    curve = power_curve(test, kappa, model, SimConfig(reps=REPS, seed=1))
    print(f"  alpha={alpha:.3f}: limit {lim.limit}, simulated power "
          + " ".join(f"{p:.3f}" for p in curve.estimate[::3]))
print("  T_B(e) =", round(t_b(test, model.analytic_e), 4))
