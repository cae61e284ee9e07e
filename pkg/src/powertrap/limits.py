"""Limiting rejection probability of ``{T_B > kappa}`` as rho -> a."""
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import tolerances as _tol
from .covariance import concentration_direction, limit_lambda, offdiag_check
from .errors import (
    DegenerateTest,
    EInSpanX,
    NoScaling,
    NotConcentrating,
    TrivialRegion,
)
from .invariant import region_classify, t_b
from .quadform import prob_positive

__all__ = [
    "LimitReport",
    "expansion_order",
    "classify_limit",
    "eigvec_boundary_limit",
    "span_limit",
    "orthant_estimate",
    "slm_limit",
]

CASES = (
    "INTERIOR",
    "EXTERIOR",
    "SPAN_X_BOUNDARY",
    "EIGVEC_BOUNDARY",
    "NONEIGVEC_BOUNDARY",
    "DEGENERATE",
)


@dataclass
class LimitReport:
    """Outcome of the limit analysis.

    ``limit`` is None when the limit is not determined; ``estimate`` then
    carries the value computed under the symmetric square-root convention.
    ``rule`` names the argument that produced the number.
    """

    case: str
    limit: Optional[float]
    rule: str
    q: Optional[int] = None
    kappa: Optional[float] = None
    t_b_e: Optional[float] = None
    e: Optional[np.ndarray] = None
    Lambda: Optional[np.ndarray] = None
    assumptions: dict = field(default_factory=dict)
    estimate: Optional[float] = None
    notes: list = field(default_factory=list)

    @property
    def determined(self):
        return self.limit is not None


def expansion_order(test, e):
    """Order of the first non-vanishing term of ``T_B`` expanded at ``e``.

    Returns ``(2, D2)`` with ``D2`` an n x n matrix when ``C e`` is an
    eigenvector of B, and ``(1, d)`` with ``d`` the gradient otherwise.
    """
    e = np.asarray(e, dtype=float)
    C, B = test.design.C, test.B
    Ce = C @ e
    nCe2 = Ce @ Ce
    if math.sqrt(nCe2) <= _tol.TOL.span * np.linalg.norm(e):
        raise EInSpanX("e lies in span(X)")
    if test.degenerate:
        raise DegenerateTest("B is a multiple of the identity")
    lam = (Ce @ B @ Ce) / nCe2
    Pe = np.eye(len(e)) - np.outer(e, e) / (e @ e)
    normB = np.linalg.norm(B, 2)
    resid = np.linalg.norm(B @ Ce - lam * Ce)
    if resid <= _tol.TOL.eigvec * normB * math.sqrt(nCe2):
        D = (C.T @ B @ C - lam * (C.T @ C)) / nCe2
        if np.linalg.norm(Pe @ D @ Pe) <= 1e-12 * normB:
            raise DegenerateTest("second-order term vanishes off e")
        return 2, 0.5 * (D + D.T)
    CtCe = C.T @ Ce
    d = 2.0 / nCe2 * (C.T @ (B @ Ce) - lam * CtCe)
    if np.linalg.norm(Pe @ d) <= 1e-12 * normB:
        raise DegenerateTest("first-order term vanishes off e")
    return 1, d


def span_limit(test, kappa, Lam):
    """``Pr(T_B(Lambda G) > kappa)`` for ``G`` standard Gaussian."""
    C = test.design.C
    if kappa <= test.lmin + test.level_tol:
        return 1.0
    M = C @ Lam
    return prob_positive(M.T @ (test.B - kappa * np.eye(test.B.shape[0])) @ M)


def eigvec_boundary_limit(test, Lam, lam):
    """``Pr(G' Lambda' (C'BC - lam C'C) Lambda G > 0)``; exactly 1 when
    ``lam`` is the smallest eigenvalue of B."""
    if abs(lam - test.lmin) <= test.level_tol:
        return 1.0
    C = test.design.C
    M = Lam.T @ (C.T @ test.B @ C - lam * (C.T @ C)) @ Lam
    return prob_positive(M)


def orthant_estimate(d, Lam, e):
    """``Pr(d'Lambda G and e'G have the same sign)``.

    For a bivariate centered Gaussian with correlation r this equals
    ``1/2 + arcsin(r)/pi``.
    """
    g = Lam.T @ d
    ng, ne = np.linalg.norm(g), np.linalg.norm(e)
    if ng == 0:
        return None
    r = float(np.clip(g @ e / (ng * ne), -1.0, 1.0))
    return 0.5 + math.asin(r) / math.pi


def classify_limit(test, kappa, model, grid=None):
    """Limit of the rejection probability of ``{T_B > kappa}``.

    Parameters
    ----------
    test : QuadFormTest
    kappa : float
        Must lie in ``[lambda_1(B), lambda_max(B))``.
    model : CovarianceModel
    grid : array_like, optional
        Parameter values approaching ``a`` used for the numeric checks.

    Returns
    -------
    LimitReport
    """
    kappa = float(kappa)
    if test.degenerate:
        lim = 1.0 if test.lmin > kappa else 0.0
        return LimitReport("DEGENERATE", lim, "constant-statistic", kappa=kappa)
    if not test.nontrivial(kappa):
        raise TrivialRegion(
            f"kappa={kappa:g} outside [{test.lmin:g}, {test.lmax:g}); "
            "the region is empty or everything"
        )
    conc = concentration_direction(model, grid)
    if not conc.passed:
        raise NotConcentrating(
            f"concentration residual {conc.residuals[-1]:.3g} above tolerance"
        )
    e = model.analytic_e if model.analytic_e is not None else conc.e_hat
    grid = conc.grid
    assumptions = {
        "concentration": True,
        "elliptical_sufficient": True,
        "square_root_symmetric": model.sem is None or model.sem.symmetric,
        "limit_matrix": None,
        "offdiag": None,
    }
    notes = []
    if not assumptions["square_root_symmetric"]:
        notes.append(
            "W is not symmetric: the natural square root differs from the "
            "symmetric one and boundary limits may depend on that choice"
        )
    rep = LimitReport(
        "INTERIOR", None, "", kappa=kappa, e=e, assumptions=assumptions, notes=notes
    )

    C = test.design.C
    if np.linalg.norm(C @ e) <= _tol.TOL.e_span:
        Lam = limit_lambda(model, grid, e)
        assumptions["limit_matrix"] = True
        rep.case, rep.rule, rep.Lambda = "SPAN_X_BOUNDARY", "span-gaussian-limit", Lam
        rep.t_b_e = test.lmin
        rep.limit = span_limit(test, kappa, Lam)
        if kappa > test.lmin + test.level_tol and not 0 < rep.limit < 1:
            notes.append("limit on span(X) expected strictly inside (0, 1)")
        return rep

    t = t_b(test, e)
    rep.t_b_e = t
    if t > kappa + test.level_tol:
        rep.case, rep.limit, rep.rule = "INTERIOR", 1.0, "concentration-interior"
        return rep
    if t < kappa - test.level_tol:
        rep.case, rep.limit, rep.rule = "EXTERIOR", 0.0, "concentration-exterior"
        return rep

    q, D = expansion_order(test, e)
    rep.q = q
    if q == 2:
        Lam = limit_lambda(model, grid, e)
        assumptions["limit_matrix"] = True
        rep.Lambda = Lam
        rep.case, rep.rule = "EIGVEC_BOUNDARY", "eigvec-boundary-quadratic"
        rep.limit = eigvec_boundary_limit(test, Lam, t)
        return rep

    rep.case = "NONEIGVEC_BOUNDARY"
    try:
        ok = offdiag_check(model, grid, e)
    except NoScaling:
        ok = None
    assumptions["offdiag"] = ok
    if ok:
        rep.limit, rep.rule = 0.5, "noneigvec-boundary-half"
        return rep
    rep.rule = "noneigvec-boundary-undetermined"
    try:
        Lam = limit_lambda(model, grid, e)
        assumptions["limit_matrix"] = True
        rep.Lambda = Lam
        rep.estimate = orthant_estimate(D, Lam, e)
        notes.append("estimate is conditional on the symmetric square root")
    except Exception as exc:  # noqa: BLE001 - reported, not raised
        assumptions["limit_matrix"] = False
        notes.append(f"limit matrix unavailable: {exc}")
    return rep


def slm_limit(test, kappa, model):
    """Limit for the spatial lag model: decided by where ``f_max`` sits.

    ``model`` is an SEM :class:`CovarianceModel` or a ``SemSpec``.
    """
    sem = getattr(model, "sem", None) or model
    f = sem.f_max
    rp = region_classify(test, kappa, f)
    rep = LimitReport(rp.location, None, "slm-" + rp.location.lower(), kappa=kappa, e=f)
    if rp.location == "INTERIOR":
        rep.limit = 1.0
    elif rp.location == "EXTERIOR":
        rep.limit = 0.0
    else:
        rep.case = "BOUNDARY"
        rep.notes.append("f_max on the boundary of the region: limit not determined")
    rep.t_b_e = t_b(test, f)
    return rep
