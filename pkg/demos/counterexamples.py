"""
Being on the boundary decides nothing by itself
===============================================

Two regions show that a concentration direction on the boundary can give
any limit. In the first, ``e`` is removed from a cone around it, so ``e``
is a boundary point and yet the power still tends to 1. In the second the
covariance concentrates along a direction that rotates towards ``e`` as
rho grows; how fast it rotates is controlled by ``gamma``.

The pilot sweep at the end is how the default ``gamma = 0.1`` was chosen.
"""

import numpy as np

from powertrap.montecarlo import SimConfig, reproduce_counterexample

cfg = SimConfig(reps=50_000, seed=20240611)

curve, comp, info = reproduce_counterexample("EX1", cfg, alpha=0.05, n=3)
print("cone minus its axis, size", round(info["null_size_exact"], 6))
print("  e on boundary:", info["boundary_certificate"]["on_boundary"])
for r, p, q in zip(curve.rho, curve.estimate, comp.estimate):
    print(f"  rho={r:.6f}  region {p:.4f}  complement {q:.4f}")

###############################################################################
# Rotating concentration direction
# --------------------------------
# The region ``{y1 y2 >= 0}`` has null size 1/2 and contains ``e = (0, 1)``
# on its boundary. The power at ``rho = 1 - 2^-14`` for a range of rotation
# speeds:

for gamma in (0.05, 0.1, 0.2, 0.5, 1.0):
    c, _, info = reproduce_counterexample("EX2", cfg, gamma=gamma)
    print(f"gamma={gamma:<5} power at rho_last {info['final_estimate']:.4f}")
