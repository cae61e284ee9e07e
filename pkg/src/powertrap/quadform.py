"""Sign probabilities of centered Gaussian quadratic forms.

``Pr(G'AG > 0)`` equals ``Pr(sum w_i Z_i^2 > 0)`` with ``w`` the eigenvalues
of ``A``. It is computed by numerical inversion of the characteristic
function (Imhof's integral). At threshold zero the phase of the integrand
tends to a constant, so the integrand does not oscillate and adaptive
quadrature converges quickly.
"""
import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate, optimize

from . import tolerances as _tol
from .errors import AllZero, DegenerateTest, IntegrationFailure
from .linalg import check_symmetric

__all__ = [
    "WeightedChiSq",
    "weights_of",
    "sign_prob",
    "prob_positive",
    "null_rejection_prob",
    "critical_value",
]

TAIL_TOL = 1e-9
MC_DRAWS = 1_000_000


@dataclass(frozen=True)
class WeightedChiSq:
    weights: np.ndarray

    @property
    def n_pos(self):
        return int(np.sum(self.weights > 0))

    @property
    def n_neg(self):
        return int(np.sum(self.weights < 0))


@dataclass(frozen=True)
class SignProb:
    """Result of a sign-probability evaluation.

    ``method`` is ``exact`` (one-signed weights), ``imhof`` or
    ``montecarlo``; ``stderr`` is 0 except for the Monte Carlo fallback.
    """

    p: float
    method: str
    error: float
    stderr: float = 0.0


def weights_of(A):
    """Eigenvalues of ``A`` with relatively tiny ones removed."""
    A = check_symmetric(A)
    w = np.linalg.eigvalsh(A)
    top = np.max(np.abs(w)) if w.size else 0.0
    if top == 0:
        return WeightedChiSq(np.zeros(0))
    return WeightedChiSq(w[np.abs(w) > _tol.TOL.drop * top])


def _imhof(w):
    w = w / np.max(np.abs(w))
    m = w.size
    half = 0.5 * m

    def f(u):
        if u == 0.0:
            return 0.5 * np.sum(w)
        wu = w * u
        theta = 0.5 * np.sum(np.arctan(wu))
        logr = 0.25 * np.sum(np.log1p(wu * wu))
        return math.sin(theta) / (u * math.exp(logr))

    # |integrand| <= 1 / (u^{1+m/2} prod|w|^{1/2}), so the tail beyond U is
    # at most 1 / (pi * (m/2) * U^{m/2} * prod|w|^{1/2}).
    log_prod = 0.5 * np.sum(np.log(np.abs(w)))
    logU = -(math.log(math.pi * half * TAIL_TOL) + log_prod) / half
    U = max(math.exp(logU), 1.0)
    edges = [0.0, 1.0]
    while edges[-1] < U:
        edges.append(min(edges[-1] * 10.0, U))
    total, err = 0.0, 0.0
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        for lo, hi in zip(edges[:-1], edges[1:]):
            val, e = integrate.quad(f, lo, hi, epsabs=1e-12, epsrel=1e-10, limit=200)
            total += val
            err += e
    return 0.5 + total / math.pi, err / math.pi + TAIL_TOL


def _montecarlo(w, draws=MC_DRAWS, seed=20240611):
    rng = np.random.default_rng(seed)
    hits = 0
    done = 0
    while done < draws:
        m = min(200_000, draws - done)
        Z = rng.standard_normal((m, w.size))
        hits += int(np.sum((Z * Z) @ w > 0))
        done += m
    p = hits / draws
    return p, math.sqrt(max(p * (1 - p), 1e-300) / draws)


def sign_prob(A, allow_mc=True):
    """Full result for ``Pr(G'AG > 0)``; see :func:`prob_positive`."""
    wc = weights_of(A)
    w = wc.weights
    if w.size == 0:
        raise AllZero("quadratic form has no nonzero weights")
    if wc.n_neg == 0:
        return SignProb(1.0, "exact", 0.0)
    if wc.n_pos == 0:
        return SignProb(0.0, "exact", 0.0)
    try:
        p, err = _imhof(w)
        if err > 1e-6 or not np.isfinite(p):
            raise IntegrationFailure(f"integration error estimate {err:.2e}")
    except (integrate.IntegrationWarning, IntegrationFailure) as exc:
        if not allow_mc:
            raise IntegrationFailure(str(exc)) from exc
        p, se = _montecarlo(w)
        return SignProb(p, "montecarlo", 4 * se, se)
    return SignProb(float(min(max(p, 0.0), 1.0)), "imhof", err)


def prob_positive(A):
    """``Pr(G'AG > 0)`` for ``G`` standard Gaussian.

    Parameters
    ----------
    A : array_like, symmetric

    Returns
    -------
    float

    Raises
    ------
    AllZero
        If every eigenvalue of ``A`` is numerically zero.

    Examples
    --------
    >>> round(prob_positive([[1., 0.], [0., -1.]]), 9)
    0.5
    """
    return sign_prob(A).p


def null_rejection_prob(test, kappa):
    """Size of ``{T_B > kappa}`` under Gaussian errors and no correlation."""
    if test.degenerate:
        return 1.0 if test.lmin > kappa else 0.0
    if kappa < test.lmin:
        return 1.0
    if kappa >= test.lmax:
        return 0.0
    M = test.B - kappa * np.eye(test.B.shape[0])
    try:
        return prob_positive(M)
    except AllZero:
        return 0.0


def critical_value(test, alpha):
    """Smallest-error ``kappa`` with ``null_rejection_prob(kappa) = alpha``.

    The size is continuous and decreasing in ``kappa`` on the open
    eigenvalue range of B, so a bracketing root finder on that range
    applies.
    """
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in (0, 1)")
    if test.degenerate:
        raise DegenerateTest("B is a multiple of the identity")
    lo, hi = test.lmin, test.lmax

    def g(k):
        return null_rejection_prob(test, k) - alpha

    # the size equals 1 just above lambda_1 only in the limit, so nudge the
    # bracket ends inside the range
    span = hi - lo
    a_, b_ = lo + 1e-14 * span, hi - 1e-14 * span
    ga, gb = g(a_), g(b_)
    if ga <= 0:
        return a_
    if gb >= 0:
        return b_
    return float(optimize.brentq(g, a_, b_, xtol=1e-13 * span, rtol=1e-14))
