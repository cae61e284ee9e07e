"""Limiting power of invariant tests for correlation in linear regression.

The package covers covariance families that concentrate on a direction as
the correlation parameter approaches its boundary (spatial error models,
AR(1) errors, and a few textbook examples), quadratic-form ratio tests,
their limiting rejection probabilities, the zero-power-trap threshold
alpha*, indistinguishability checks, and a Monte Carlo engine used to
cross-check the closed forms.
"""
__version__ = "0.1.0"

from .covariance import (  # noqa: E402
    ar1_model,
    concentration_direction,
    custom_model,
    example_model,
    limit_lambda,
    offdiag_check,
    sem_model,
)
from .diagnostics import alpha_star, indistinguishability, trap_for_cliff_ord_and_poi  # noqa: E402
from .invariant import build_b, make_test, maximal_invariant, region_classify, t_b  # noqa: E402
from .limits import classify_limit, expansion_order, slm_limit  # noqa: E402
from .linalg import residual_basis, sym_eig, sym_sqrt  # noqa: E402
from .montecarlo import (  # noqa: E402
    NoiseSpec,
    SimConfig,
    estimate_rejection,
    power_curve,
    reproduce_counterexample,
    simulate_slm,
)
from .quadform import critical_value, null_rejection_prob, prob_positive  # noqa: E402
