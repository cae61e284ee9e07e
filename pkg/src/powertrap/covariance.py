"""Covariance families rho -> Sigma(rho), their concentration direction,
scaling and limit matrix."""
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import tolerances as _tol
from .errors import (
    BadWeights,
    DimError,
    NonFinite,
    NoScaling,
    NotConcentrating,
    NotInjective,
    NotPSD,
)
from .linalg import sign_fix, sym_eig, sym_sqrt

__all__ = [
    "SemSpec",
    "CovarianceModel",
    "ConcentrationCheck",
    "dominant_eigenpair",
    "sem_model",
    "ar1_model",
    "example_model",
    "custom_model",
    "default_grid",
    "concentration_direction",
    "scaling",
    "limit_lambda",
    "offdiag_check",
    "sigma_dot0",
]

KINDS = ("SEM", "AR1_I", "AR1_II", "EX1", "EX2", "STRETCH", "Custom")


@dataclass(frozen=True, eq=False)
class SemSpec:
    W: np.ndarray
    lambda_max: float
    f_max: np.ndarray

    @property
    def symmetric(self):
        W = self.W
        return bool(np.allclose(W, W.T, rtol=0, atol=1e-12 * np.max(np.abs(W))))


@dataclass(eq=False)
class CovarianceModel:
    """A covariance family on [0, a) with Sigma(0) = I.

    Parameters
    ----------
    a : float
        Right end of the parameter range.
    sigma_fn : callable
        ``rho -> Sigma(rho)``, symmetric positive definite.
    n : int
    kind : str
        One of ``SEM``, ``AR1_I``, ``AR1_II``, ``EX1``, ``EX2``, ``STRETCH``,
        ``Custom``.
    analytic_e, analytic_c, analytic_Lambda : optional
        Known concentration direction, scaling function and limit matrix.
    sem : SemSpec, optional
    dsigma0 : ndarray, optional
        Derivative of Sigma at 0 when known in closed form.
    sqrt_fn : callable, optional
        Alternative square root ``L(rho)`` with ``L L' = Sigma``.
    params : dict
        Descriptive parameters, used in reports.
    """

    a: float
    sigma_fn: Callable[[float], np.ndarray]
    n: int
    kind: str = "Custom"
    analytic_e: Optional[np.ndarray] = None
    analytic_c: Optional[Callable[[float], float]] = None
    analytic_Lambda: Optional[np.ndarray] = None
    sem: Optional[SemSpec] = None
    dsigma0: Optional[np.ndarray] = None
    sqrt_fn: Optional[Callable[[float], np.ndarray]] = None
    params: dict = field(default_factory=dict)
    sandwich_fn: Optional[Callable[[np.ndarray, float], np.ndarray]] = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown model kind {self.kind!r}")
        if not (np.isfinite(self.a) and self.a > 0):
            raise ValueError("a must be a positive finite number")
        if self.n < 2:
            raise DimError("need n >= 2")
        S0 = self.sigma(0.0)
        if np.max(np.abs(S0 - np.eye(self.n))) > 1e-10:
            raise ValueError("Sigma(0) must be the identity")
        for rho in (0.5 * self.a, self.a * (1 - 2.0**-8)):
            w = np.linalg.eigvalsh(self.sigma(rho))
            if w[0] <= 0:
                raise NotPSD(f"Sigma({rho:g}) is not positive definite")
        if self.analytic_e is not None:
            e = np.asarray(self.analytic_e, dtype=float)
            self.analytic_e = e / np.linalg.norm(e)

    def sigma(self, rho):
        S = np.asarray(self.sigma_fn(float(rho)), dtype=float)
        if S.shape != (self.n, self.n):
            raise DimError(f"Sigma has shape {S.shape}, expected {(self.n, self.n)}")
        if not np.all(np.isfinite(S)):
            raise NonFinite(f"Sigma({rho:g}) has non-finite entries")
        return 0.5 * (S + S.T)

    def sandwich(self, C, rho):
        """``C Sigma(rho) C'``, computed without forming Sigma when the
        model knows a better route."""
        C = np.asarray(C, dtype=float)
        if self.sandwich_fn is not None:
            M = self.sandwich_fn(C, float(rho))
        else:
            M = C @ self.sigma(rho) @ C.T
        return 0.5 * (M + M.T)


@dataclass(frozen=True)
class ConcentrationCheck:
    e_hat: np.ndarray
    residuals: np.ndarray
    passed: bool
    grid: np.ndarray


def default_grid(a, m_lo=4, m_hi=16):
    """Geometric approach ``a * (1 - 2**-m)`` for ``m = m_lo..m_hi``."""
    m = np.arange(m_lo, m_hi + 1, dtype=float)
    return a * (1.0 - 2.0**-m)


def _check_grid(model, grid):
    grid = default_grid(model.a) if grid is None else np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size < 3:
        raise ValueError("grid needs at least three points")
    if np.any(np.diff(grid) <= 0) or grid[0] < 0 or grid[-1] >= model.a:
        raise ValueError("grid must be strictly increasing inside [0, a)")
    if grid[-1] < model.a * (1 - 1e-4):
        raise ValueError("last grid point must be within 1e-4*a of a")
    return grid


# ---------------------------------------------------------------- SEM

def dominant_eigenpair(W, max_iter=10_000):
    """Positive dominant eigenvalue of ``W`` and its unit eigenvector.

    The spectrum is screened with a dense eigenvalue solver (simple,
    real, positive, with no eigenvalue of larger modulus). The eigenvector
    is seeded from the null space of ``W - lambda I`` and polished by
    power iteration on the shifted matrix ``W + lambda I``, whose dominant
    eigenvalue is isolated even when ``-lambda`` is also an eigenvalue of
    ``W``.
    """
    W = np.asarray(W, dtype=float)
    if W.ndim != 2 or W.shape[0] != W.shape[1]:
        raise BadWeights("W must be square")
    if not np.all(np.isfinite(W)):
        raise BadWeights("W has non-finite entries")
    n = W.shape[0]
    if n < 2:
        raise DimError("need n >= 2")
    scale = np.max(np.abs(W))
    if scale == 0:
        raise BadWeights("W is zero")
    if np.any(np.abs(np.diag(W)) > 1e-12 * scale):
        raise BadWeights("W must have a zero diagonal")

    ev = np.linalg.eigvals(W)
    radius = np.max(np.abs(ev))
    real = ev[np.abs(ev.imag) <= 1e-10 * radius].real
    if real.size == 0 or real.max() <= 0:
        raise BadWeights("W has no positive real eigenvalue")
    lam = float(real.max())
    if radius > lam * (1 + 1e-9):
        raise BadWeights("an eigenvalue of W exceeds the positive one in modulus")
    if np.sum(np.abs(ev - lam) <= 1e-8 * lam) > 1:
        raise BadWeights("dominant eigenvalue of W is not simple")

    _, _, Vt = np.linalg.svd(W - lam * np.eye(n))
    v = Vt[-1]
    v /= np.linalg.norm(v)
    M = W + lam * np.eye(n)
    for _ in range(max_iter):
        if np.linalg.norm(W @ v - lam * v) <= 1e-10 * lam:
            break
        v = M @ v
        v /= np.linalg.norm(v)
    else:
        raise BadWeights("power iteration did not converge")
    return lam, sign_fix(v)


def sem_model(W):
    """Spatial error model ``Sigma(rho) = [(I - rho W')(I - rho W)]^{-1}``.

    Examples
    --------
    >>> m = sem_model([[0, 1], [1, 0]])
    >>> m.a
    1.0
    """
    W = np.asarray(W, dtype=float)
    lam, f = dominant_eigenpair(W)
    n = W.shape[0]
    spec = SemSpec(W, lam, f)
    I = np.eye(n)

    def L(rho):
        return np.linalg.solve(I - rho * W, I)

    def sigma_fn(rho):
        Li = L(rho)
        return Li @ Li.T

    def sandwich_fn(C, rho):
        # C L = (L' C')' and L' C' solves (I - rho W') Z = C'; this keeps the
        # large component along f_max out of the result when C f_max = 0
        CL = np.linalg.solve((I - rho * W).T, C.T).T
        return CL @ CL.T

    Pf = np.outer(f, f)
    A = I - (I - Pf) @ W / lam
    try:
        Lam = np.linalg.solve(A, I) - Pf
    except np.linalg.LinAlgError as exc:
        raise NotInjective("I - (1/lambda_max) P W is singular") from exc

    return CovarianceModel(
        a=1.0 / lam,
        sigma_fn=sigma_fn,
        n=n,
        kind="SEM",
        analytic_e=f,
        analytic_c=lambda rho: 1.0,
        analytic_Lambda=Lam,
        sem=spec,
        dsigma0=W + W.T,
        sqrt_fn=L,
        params={"lambda_max": lam},
        sandwich_fn=sandwich_fn,
    )


# ---------------------------------------------------------------- AR(1)

def ar1_model(n, case="I"):
    """Stationary AR(1) correlation, ``(+-rho)^|i-j|``.

    Case ``I`` concentrates on the constant vector, case ``II`` on the
    alternating one.
    """
    n = int(n)
    if n < 2:
        raise DimError("need n >= 2")
    case = str(case).upper()
    if case not in ("I", "II"):
        raise ValueError("case must be 'I' or 'II'")
    lag = np.abs(np.subtract.outer(np.arange(n), np.arange(n)))
    sgn = 1.0 if case == "I" else -1.0

    def sigma_fn(rho):
        return (sgn * rho) ** lag

    if case == "I":
        e = np.ones(n)
    else:
        e = np.array([(-1.0) ** (i + 1) for i in range(n)])
    band = sgn * (lag == 1).astype(float)
    return CovarianceModel(
        a=1.0,
        sigma_fn=sigma_fn,
        n=n,
        kind="AR1_" + case,
        analytic_e=e / np.sqrt(n),
        analytic_c=lambda rho: (1.0 - rho) ** -0.5,
        dsigma0=band,
        params={"case": case},
    )


# ---------------------------------------------------------------- examples

def _ex2_phi(gamma):
    def phi(rho):
        return 0.5 * np.pi * (1.0 - (1.0 - rho) ** gamma)

    return phi


def example_model(kind, n=2, e=None, gamma=0.1, phi=None):
    """Small textbook families.

    ``EX1``: ``I + rho/(1-rho) e e'``. ``EX2`` (n = 2): the same with a
    rotating direction ``(cos phi(rho), sin phi(rho))``; by default
    ``phi(rho) = pi/2 * (1 - (1-rho)**gamma)``. ``STRETCH`` (n = 2):
    ``diag(1, 1 - rho)``.
    """
    kind = str(kind).upper()
    n = int(n)
    if kind == "EX1":
        if n < 2:
            raise DimError("need n >= 2")
        if e is None:
            e = np.eye(n)[-1]
        e = np.asarray(e, dtype=float)
        if e.shape != (n,):
            raise DimError("e must have length n")
        e = e / np.linalg.norm(e)
        E = np.outer(e, e)

        def sigma_fn(rho):
            return np.eye(n) + rho / (1.0 - rho) * E

        return CovarianceModel(
            a=1.0, sigma_fn=sigma_fn, n=n, kind="EX1", analytic_e=e,
            analytic_c=lambda rho: 1.0, analytic_Lambda=np.eye(n) - E,
            dsigma0=E, params={"e": e.tolist()},
        )
    if kind == "EX2":
        if n != 2:
            raise DimError("EX2 is defined for n = 2 only")
        if phi is None:
            phi = _ex2_phi(float(gamma))
        if abs(phi(0.0)) > 1e-12:
            raise ValueError("phi(0) must be 0")

        def sigma_fn(rho):
            t = phi(rho)
            v = np.array([np.cos(t), np.sin(t)])
            return np.eye(2) + rho / (1.0 - rho) * np.outer(v, v)

        return CovarianceModel(
            a=1.0, sigma_fn=sigma_fn, n=2, kind="EX2",
            analytic_e=np.array([0.0, 1.0]), params={"gamma": gamma},
        )
    if kind == "STRETCH":
        if n != 2:
            raise DimError("STRETCH is defined for n = 2 only")

        def sigma_fn(rho):
            return np.diag([1.0, 1.0 - rho])

        return CovarianceModel(
            a=1.0, sigma_fn=sigma_fn, n=2, kind="STRETCH",
            analytic_e=np.array([1.0, 0.0]),
            analytic_c=lambda rho: (1.0 - rho) ** -0.5,
            analytic_Lambda=np.diag([0.0, 1.0]),
            dsigma0=np.diag([0.0, -1.0]),
        )
    raise ValueError(f"unknown example {kind!r}")


def custom_model(sigma_fn, a, n, e=None, c=None, Lambda=None):
    """Wrap a user-supplied family."""
    return CovarianceModel(
        a=float(a), sigma_fn=sigma_fn, n=int(n), kind="Custom",
        analytic_e=e, analytic_c=c, analytic_Lambda=Lambda,
    )


# ---------------------------------------------------------------- checks

def concentration_direction(model, grid=None):
    """Estimate the direction on which ``Sigma / lambda_max`` collapses.

    Returns a :class:`ConcentrationCheck`. ``passed`` requires the last
    residual to be below ``check`` and the residuals to decrease. When the
    residuals do not decrease at all, :class:`NotConcentrating` is raised.
    """
    grid = _check_grid(model, grid)
    S_last = model.sigma(grid[-1])
    eig = sym_eig(S_last)
    e_hat = sign_fix(eig.vectors[:, -1])
    E = np.outer(e_hat, e_hat)
    res = np.empty(grid.size)
    for i, rho in enumerate(grid):
        S = model.sigma(rho)
        lam = np.linalg.eigvalsh(S)[-1]
        res[i] = np.linalg.norm(S / lam - E, 2)
    tail = res[-3:]
    decreasing = res[-1] < res[0] and np.all(np.diff(tail) <= 1e-12 * max(tail[0], 1e-300))
    if not decreasing:
        raise NotConcentrating(
            "residuals of Sigma/lambda_max - e e' do not decrease along the grid"
        )
    passed = bool(res[-1] <= _tol.TOL.check)
    if passed and model.analytic_e is not None:
        if abs(float(e_hat @ model.analytic_e)) < 1 - 1e-6:
            passed = False
    return ConcentrationCheck(e_hat, res, passed, grid)


def _direction(model, grid=None):
    if model.analytic_e is not None:
        return model.analytic_e
    return concentration_direction(model, grid).e_hat


def _fit_slope(d, vals, npts=6):
    d, vals = np.asarray(d)[-npts:], np.asarray(vals)[-npts:]
    if np.any(vals <= 0):
        return np.nan
    return float(np.polyfit(np.log(d), np.log(vals), 1)[0])


def decay_exponent(model, grid=None, e=None):
    """Log-log slope of ``||P Sigma(rho) P||`` against ``a - rho``.

    ``P`` projects onto the orthogonal complement of ``e``.
    """
    grid = _check_grid(model, grid)
    e = _direction(model, grid) if e is None else e
    P = np.eye(model.n) - np.outer(e, e)
    vals = [np.linalg.norm(P @ model.sigma(r) @ P, 2) for r in grid]
    return _fit_slope(model.a - grid, vals)


def scaling(model, grid=None, e=None):
    """Return the scaling function ``c(rho)``.

    Uses ``model.analytic_c`` when available; otherwise fits the decay
    exponent ``s`` of ``||P Sigma P||`` and returns ``(a - rho)**(-s/2)``.
    Slopes within 0.05 of a multiple of 1/2 are snapped to it.
    """
    if model.analytic_c is not None:
        return model.analytic_c
    s = decay_exponent(model, grid, e)
    if not np.isfinite(s):
        raise NoScaling("could not fit a decay exponent for P Sigma P")
    snapped = round(2 * s) / 2
    if abs(s - snapped) <= 0.05:
        s = snapped
    a = model.a
    return lambda rho: (a - rho) ** (-0.5 * s)


def limit_lambda(model, grid=None, e=None):
    """Limit matrix of the scaled, projected square root.

    For SEM the closed form is returned. Otherwise ``V = lim c^2 P Sigma P``
    is extrapolated linearly in ``a - rho`` from the last two grid points
    and its symmetric square root is returned.
    """
    grid = _check_grid(model, grid)
    if e is None:
        e = _direction(model, grid)
    e = np.asarray(e, dtype=float)
    e = e / np.linalg.norm(e)
    P = np.eye(model.n) - np.outer(e, e)
    if model.analytic_Lambda is not None:
        Lam = np.asarray(model.analytic_Lambda, dtype=float)
    else:
        c = scaling(model, grid, e)

        def V(rho):
            return c(rho) ** 2 * (P @ model.sigma(rho) @ P)

        d1, d2 = model.a - grid[-2], model.a - grid[-1]
        V1, V2 = V(grid[-2]), V(grid[-1])
        Vlim = V2 + (V2 - V1) * d2 / (d1 - d2)
        Lam = sym_sqrt(0.5 * (Vlim + Vlim.T))
    _check_injective(Lam, e)
    return Lam


def _check_injective(Lam, e):
    scale = max(np.linalg.norm(Lam, 2), 1.0)
    if np.linalg.norm(Lam @ e) > 1e-6 * scale:
        raise NotInjective("limit matrix does not annihilate e")
    Q = np.linalg.svd(np.eye(len(e)) - np.outer(e, e))[0][:, : len(e) - 1]
    s = np.linalg.svd(Lam @ Q, compute_uv=False)
    if s[-1] < _tol.TOL.injective * scale:
        raise NotInjective("limit matrix is singular on the complement of e")


def offdiag_norms(model, grid=None, e=None):
    grid = _check_grid(model, grid)
    e = _direction(model, grid) if e is None else e
    c = scaling(model, grid, e)
    Pe = np.outer(e, e)
    P = np.eye(model.n) - Pe
    out = []
    for r in grid:
        S = model.sigma(r)
        lam = np.linalg.eigvalsh(S)[-1]
        out.append(c(r) * np.linalg.norm(P @ S @ Pe, 2) / np.sqrt(lam))
    return grid, np.array(out)


def offdiag_check(model, grid=None, e=None):
    """Whether the scaled cross block between e and its complement vanishes.

    True when the norm at the last grid point is below ``check``, or when
    the norms decrease over the last three points and follow a power law
    in ``a - rho`` with exponent at least 1/4 (so they tend to zero).
    """
    grid, vals = offdiag_norms(model, grid, e)
    if vals[-1] <= _tol.TOL.check:
        return True
    if not np.all(np.diff(vals[-3:]) < 0):
        return False
    return bool(_fit_slope(model.a - grid, vals) >= 0.25)


def sigma_dot0(model):
    """Derivative of Sigma at 0.

    Closed forms are used when the model provides one; otherwise a forward
    difference with one Richardson step (h = 1e-5 a and h/2).
    """
    if model.dsigma0 is not None:
        return np.asarray(model.dsigma0, dtype=float)
    h = 1e-5 * model.a
    I = np.eye(model.n)
    D1 = (model.sigma(h) - I) / h
    D2 = (model.sigma(h / 2) - I) / (h / 2)
    D = 2 * D2 - D1
    return 0.5 * (D + D.T)
