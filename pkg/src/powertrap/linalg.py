"""Dense symmetric linear algebra: eigendecompositions, residual bases,
projectors and square roots."""
from dataclasses import dataclass

import numpy as np

from . import tolerances as _tol
from .errors import DimError, NonFinite, NonSymmetric, NotPSD, RankDeficient

__all__ = [
    "SymEig",
    "Design",
    "sym_eig",
    "residual_basis",
    "sym_sqrt",
    "projector",
    "sign_fix",
    "check_symmetric",
]


@dataclass(frozen=True)
class SymEig:
    """Eigenvalues in ascending order with matching orthonormal columns."""

    values: np.ndarray
    vectors: np.ndarray

    @property
    def lmin(self):
        return float(self.values[0])

    @property
    def lmax(self):
        return float(self.values[-1])


@dataclass(frozen=True, eq=False)
class Design:
    """Design matrix with an orthonormal basis of its residual space.

    Attributes
    ----------
    X : ndarray, shape (n, k)
    C : ndarray, shape (n - k, n)
        Rows form an orthonormal basis of the orthogonal complement of
        span(X), so ``C @ C.T = I`` and ``C.T @ C = P_perp``.
    P_perp : ndarray, shape (n, n)
    """

    X: np.ndarray
    C: np.ndarray
    P_perp: np.ndarray

    @property
    def n(self):
        return self.X.shape[0]

    @property
    def k(self):
        return self.X.shape[1]

    @property
    def m(self):
        """Dimension of the residual space, n - k."""
        return self.C.shape[0]

    def in_span(self, y, tol=None):
        """True when ``y`` lies in span(X) up to a relative tolerance."""
        y = np.asarray(y, dtype=float)
        tol = _tol.TOL.span if tol is None else tol
        ny = np.linalg.norm(y)
        return bool(ny == 0 or np.linalg.norm(self.C @ y) <= tol * ny)


def _finite(A):
    A = np.asarray(A, dtype=float)
    if not np.all(np.isfinite(A)):
        raise NonFinite("matrix has non-finite entries")
    return A


def check_symmetric(A):
    """Return ``A`` as a float array after checking symmetry."""
    A = _finite(A)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DimError(f"expected a square matrix, got shape {A.shape}")
    scale = np.max(np.abs(A)) if A.size else 0.0
    if np.max(np.abs(A - A.T), initial=0.0) > _tol.TOL.sym * scale:
        raise NonSymmetric("matrix is not symmetric within tolerance")
    return A


def sym_eig(A):
    """Eigendecomposition of a symmetric matrix, eigenvalues ascending.

    Parameters
    ----------
    A : array_like, shape (m, m)

    Returns
    -------
    SymEig

    Examples
    --------
    >>> sym_eig([[0., 1.], [1., 0.]]).values
    array([-1.,  1.])
    """
    A = check_symmetric(A)
    w, V = np.linalg.eigh(0.5 * (A + A.T))
    return SymEig(w, V)


def sign_fix(v, tol=1e-12):
    """Flip ``v`` so its first entry with magnitude above ``tol`` is positive."""
    v = np.asarray(v, dtype=float)
    idx = np.flatnonzero(np.abs(v) > tol)
    if idx.size and v[idx[0]] < 0:
        return -v
    return v


def projector(V):
    """Orthogonal projector onto the column span of ``V``."""
    V = np.asarray(V, dtype=float)
    if V.ndim == 1:
        V = V[:, None]
    Q, _ = np.linalg.qr(V)
    return Q @ Q.T


def residual_basis(X, n=None):
    """Build a :class:`Design` for the design matrix ``X``.

    ``X`` may have zero columns, in which case ``n`` must be given (or
    ``X`` must have shape (n, 0)) and the residual basis is the identity.
    The basis comes from a complete QR factorization; each row is then
    sign-fixed so that the result is reproducible.
    """
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None] if X.size else np.zeros((int(n or 0), 0))
    if X.size == 0 and n is not None:
        X = np.zeros((int(n), 0))
    X = _finite(X)
    n, k = X.shape
    if n < 2:
        raise DimError("need n >= 2 observations")
    if k >= n:
        raise DimError(f"need k < n, got k={k}, n={n}")
    if k == 0:
        I = np.eye(n)
        return Design(X, I, I.copy())
    s = np.linalg.svd(X, compute_uv=False)
    if s[-1] < _tol.TOL.rank * s[0]:
        raise RankDeficient(f"design has rank < {k}")
    Q, _ = np.linalg.qr(X, mode="complete")
    C = Q[:, k:].T.copy()
    for i in range(C.shape[0]):
        C[i] = sign_fix(C[i])
    P = C.T @ C
    return Design(X, C, 0.5 * (P + P.T))


def sym_sqrt(A):
    """Symmetric nonnegative-definite square root.

    Eigenvalues in ``[-tol_psd, 0)`` are clamped to zero; anything more
    negative raises :class:`NotPSD`.
    """
    eig = sym_eig(A)
    w = eig.values
    scale = max(abs(w[-1]), abs(w[0]), 0.0)
    if w[0] < -_tol.TOL.psd * scale:
        raise NotPSD(f"smallest eigenvalue {w[0]:.3g} is negative")
    r = np.sqrt(np.clip(w, 0.0, None))
    V = eig.vectors
    S = (V * r) @ V.T
    return 0.5 * (S + S.T)
