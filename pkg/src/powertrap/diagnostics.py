"""Zero-power-trap threshold alpha*, trap verdicts for Cliff-Ord and
point-optimal tests, and indistinguishability of null and alternative."""
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import tolerances as _tol
from .covariance import concentration_direction
from .errors import ConditionUnverifiable, NotConcentrating
from .invariant import build_b, t_b
from .quadform import null_rejection_prob

__all__ = [
    "AlphaStarReport",
    "DistinguishabilityReport",
    "eigen_membership",
    "alpha_star",
    "trap_for_cliff_ord_and_poi",
    "indistinguishability",
    "full_grid",
]


@dataclass
class AlphaStarReport:
    """Smallest size at which the limiting power stops vanishing.

    ``trichotomy`` is ZERO, ONE, INTERIOR or E_IN_SPANX. ``eigen_evidence``
    records whether ``C e`` fell into the TOP or BOTTOM eigenspace of B,
    NEITHER, or was AMBIGUOUS (a residual between the two tolerances).
    """

    alpha_star: float
    trichotomy: str
    kappa_star: Optional[float]
    eigen_evidence: str
    residual_top: Optional[float] = None
    residual_bottom: Optional[float] = None
    notes: list = field(default_factory=list)


@dataclass
class DistinguishabilityReport:
    indistinguishable: bool
    grid: np.ndarray
    delta: np.ndarray
    deviations: np.ndarray
    max_deviation: float
    structural: Optional[bool] = None
    structural_lambda: Optional[float] = None
    assumptions: list = field(default_factory=list)


def _concentration(model, grid=None):
    if model.analytic_e is not None:
        return model.analytic_e
    conc = concentration_direction(model, grid)
    if not conc.passed:
        raise NotConcentrating("concentration check failed")
    return conc.e_hat


def eigen_membership(B, v, lam):
    """Relative residual ``||Bv - lam v|| / (||B|| ||v||)``."""
    nB = np.linalg.norm(B, 2)
    nv = np.linalg.norm(v)
    if nB == 0 or nv == 0:
        return 0.0
    return float(np.linalg.norm(B @ v - lam * v) / (nB * nv))


def alpha_star(test, model, grid=None):
    """Compute alpha* of the family ``{T_B > kappa}`` under ``model``.

    Examples
    --------
    A test whose matrix is ``C e e' C'`` never falls into the trap:

    >>> import numpy as np
    >>> from powertrap.covariance import sem_model
    >>> from powertrap.linalg import residual_basis
    >>> from powertrap.invariant import make_test
    >>> m = sem_model([[0, 1, 1], [1, 0, 1], [1, 1, 0]])
    >>> d = residual_basis(np.zeros((3, 0)))
    >>> v = d.C @ m.analytic_e
    >>> alpha_star(make_test(np.outer(v, v), d), m).alpha_star
    0.0
    """
    if test.degenerate:
        return AlphaStarReport(1.0, "ONE", None, "DEGENERATE",
                               notes=["constant statistic"])
    e = _concentration(model, grid)
    v = test.design.C @ e
    if np.linalg.norm(v) <= _tol.TOL.e_span:
        return AlphaStarReport(0.0, "E_IN_SPANX", None, "E_IN_SPANX")
    r_top = eigen_membership(test.B, v, test.lmax)
    r_bot = eigen_membership(test.B, v, test.lmin)
    tol, amb = _tol.TOL.eigvec, _tol.TOL.ambiguous
    notes = []
    if tol < min(r_top, r_bot) <= amb:
        notes.append("eigenvector residual between tolerances: AMBIGUOUS")
        evidence = "AMBIGUOUS"
    else:
        evidence = "NEITHER"
    if r_top <= tol:
        return AlphaStarReport(0.0, "ZERO", None, "TOP", r_top, r_bot, notes)
    if r_bot <= tol:
        return AlphaStarReport(1.0, "ONE", None, "BOTTOM", r_top, r_bot, notes)
    k_star = t_b(test, e)
    a = null_rejection_prob(test, k_star)
    return AlphaStarReport(a, "INTERIOR", k_star, evidence, r_top, r_bot, notes)


def full_grid(a, m_hi=16):
    """Grid on [0, a) dense near both ends."""
    m = np.arange(m_hi, 0, -1, dtype=float)
    lo = a * 2.0**-m
    hi = a * (1.0 - 2.0 ** -np.arange(2, m_hi + 1, dtype=float))
    return np.concatenate([[0.0], lo, hi])


def _top_projector(M, rel=1e-8):
    w, V = np.linalg.eigh(M)
    sel = w >= w[-1] - rel * abs(w[-1])
    U = V[:, sel]
    return U @ U.T


def trap_for_cliff_ord_and_poi(model, design, rho_bar, grid=None):
    """Whether the Cliff-Ord and point-optimal tests have limiting power 1
    at every nontrivial size.

    With no regressors the verdict holds exactly when ``f_max`` is in the
    top eigenspace of B; for nonnegative irreducible W that is the same as
    ``f_max`` being an eigenvector of ``W'``. With regressors a sufficient
    condition is used: ``f_max`` outside span(X), ``n - k > 1`` and a top
    eigenspace of ``C Sigma(rho) C'`` that does not move with rho. If that
    premise cannot be confirmed, :class:`ConditionUnverifiable` is raised.

    Returns
    -------
    dict
        Keys ``cliff-ord`` and ``point-optimal`` (bools), ``branch`` and
        ``details``.
    """
    if model.sem is None:
        raise ConditionUnverifiable("needs an SEM model")
    sem = model.sem
    f, W, lam = sem.f_max, sem.W, sem.lambda_max
    tests = {
        "cliff-ord": build_b(design, model, "CLIFF_ORD"),
        "point-optimal": build_b(design, model, "POINT_OPTIMAL", rho_bar=rho_bar),
    }
    if design.k == 0:
        out = {"branch": "no-regressors"}
        for name, t in tests.items():
            ok = (not t.degenerate) and (
                eigen_membership(t.B, design.C @ f, t.lmax) <= _tol.TOL.eigvec
            )
            out[name] = bool(ok)
        Wt_res = np.linalg.norm(W.T @ f - (f @ W.T @ f) * f) / np.linalg.norm(W, 2)
        out["details"] = {"f_max_eigvec_of_Wt": bool(Wt_res <= _tol.TOL.eigvec)}
        return out

    if design.in_span(f, tol=_tol.TOL.e_span):
        raise ConditionUnverifiable("f_max lies in span(X)")
    if design.m <= 1:
        raise ConditionUnverifiable("needs n - k > 1")
    grid = full_grid(model.a)[1:] if grid is None else np.asarray(grid)
    C = design.C
    P0 = _top_projector(model.sandwich(C, grid[0]))
    drift = max(
        np.linalg.norm(_top_projector(model.sandwich(C, r)) - P0, 2) for r in grid
    )
    if drift > _tol.TOL.stable:
        raise ConditionUnverifiable(
            f"top eigenspace of C Sigma C' moves with rho (drift {drift:.2e})"
        )
    out = {"branch": "with-regressors", "details": {"eigenspace_drift": float(drift)}}
    for name, t in tests.items():
        out[name] = not t.degenerate
    return out


def indistinguishability(model, design, grid=None):
    """Check whether ``C Sigma(rho) C'`` is a multiple of the identity on a
    grid, in which case no invariant test can tell rho apart from 0.

    For SEM models the sufficient structural condition that
    ``span(X)^perp`` is an eigenspace of ``W'`` is also reported; under it
    ``delta(rho) = (1 - rho*lam)^-2``.
    """
    grid = full_grid(model.a) if grid is None else np.asarray(grid, dtype=float)
    C = design.C
    m = design.m
    delta = np.empty(grid.size)
    dev = np.empty(grid.size)
    for i, r in enumerate(grid):
        M = model.sandwich(C, r)
        d = np.trace(M) / m
        delta[i] = d
        dev[i] = np.linalg.norm(M - d * np.eye(m), 2) / d
    rep = DistinguishabilityReport(
        bool(dev.max() <= _tol.TOL.indist), grid, delta, dev, float(dev.max()),
        assumptions=["errors elliptically symmetric (assumed, not checked)"],
    )
    if model.sem is not None:
        W, P = model.sem.W, design.P_perp
        lam = float(np.trace(P @ W.T @ P) / m)
        res = np.linalg.norm(W.T @ P - lam * P, 2)
        rep.structural = bool(res <= _tol.TOL.eigvec * max(1.0, np.linalg.norm(W, 2)))
        rep.structural_lambda = lam
    return rep
