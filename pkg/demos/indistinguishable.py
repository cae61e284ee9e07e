"""
A model no invariant test can detect
====================================

With equal weights and an intercept in the regression, the residual
covariance is a multiple of the identity for every rho. Every test that
is invariant to rescaling and to shifts along the regressors then has the
same rejection probability under the null and under every alternative.
"""

import numpy as np

from powertrap.covariance import sem_model
from powertrap.diagnostics import indistinguishability
from powertrap.invariant import make_test
from powertrap.linalg import residual_basis
from powertrap.montecarlo import SimConfig, power_curve
from powertrap.quadform import critical_value

n = 6
model = sem_model(np.ones((n, n)) - np.eye(n))
X = np.column_stack([np.ones(n), np.arange(n, dtype=float)])
design = residual_basis(X)

rep = indistinguishability(model, design)
print("multiple of identity on the grid:", rep.indistinguishable)
print("structural condition:", rep.structural, "eigenvalue", rep.structural_lambda)
print("largest |delta - (1+rho)^-2|:", np.abs(rep.delta - (1 + rep.grid) ** -2).max())

# any invariant test will do; take a random one
rng = np.random.default_rng(2)
B = rng.standard_normal((n - 2, n - 2))
test = make_test(B + B.T, design)
curve = power_curve(test, critical_value(test, 0.05), model, SimConfig(reps=50_000, seed=5))
for r, p, s in zip(curve.rho, curve.estimate, curve.stderr):
    print(f"rho={r:.5f}  power {p:.4f} +- {s:.4f}")
