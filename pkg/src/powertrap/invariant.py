"""Quadratic-form ratio statistics and their rejection regions."""
from dataclasses import dataclass

import numpy as np

from . import tolerances as _tol
from .covariance import sigma_dot0
from .errors import ModelMismatch
from .linalg import Design, SymEig, check_symmetric, sign_fix, sym_eig

__all__ = [
    "QuadFormTest",
    "RegionPoint",
    "make_test",
    "build_b",
    "t_b",
    "t_b_many",
    "region_classify",
    "maximal_invariant",
]


@dataclass(frozen=True, eq=False)
class QuadFormTest:
    """The statistic ``y'C'BCy / ||Cy||^2`` for a design and a matrix B.

    Build instances with :func:`make_test` or :func:`build_b`.
    """

    B: np.ndarray
    design: Design
    eig_B: SymEig
    name: str = "custom"

    @property
    def lmin(self):
        return self.eig_B.lmin

    @property
    def lmax(self):
        return self.eig_B.lmax

    @property
    def spread(self):
        return self.lmax - self.lmin

    @property
    def degenerate(self):
        scale = np.linalg.norm(self.B, 2)
        return bool(self.spread <= 1e-10 * max(scale, 1e-300))

    @property
    def level_tol(self):
        return _tol.TOL.level * self.spread

    def nontrivial(self, kappa):
        """True when ``kappa`` gives a region other than the whole space
        or the empty set."""
        return (not self.degenerate) and self.lmin <= kappa < self.lmax


@dataclass(frozen=True)
class RegionPoint:
    location: str   # INTERIOR | BOUNDARY | EXTERIOR
    reason: str     # SPAN_X | LEVEL_SET | VALUE_COMPARISON | TRIVIAL_REGION


def make_test(B, design, name="custom"):
    B = check_symmetric(B)
    if B.shape != (design.m, design.m):
        raise ModelMismatch(
            f"B must be {design.m}x{design.m} for this design, got {B.shape}"
        )
    B = 0.5 * (B + B.T)
    return QuadFormTest(B, design, sym_eig(B), name)


def build_b(design, model=None, kind="CLIFF_ORD", rho_bar=None, B=None):
    """Construct a standard test for ``design`` under ``model``.

    Parameters
    ----------
    kind : {'CLIFF_ORD', 'POINT_OPTIMAL', 'LOCALLY_BEST', 'CUSTOM'}
        ``CLIFF_ORD`` uses ``C (W + W') C'`` and needs an SEM model.
        ``POINT_OPTIMAL`` uses ``-(C Sigma(rho_bar) C')^{-1}``.
        ``LOCALLY_BEST`` uses ``C Sigma'(0) C'``.
        ``CUSTOM`` takes ``B`` as given.
    """
    kind = kind.upper().replace("-", "_")
    C = design.C
    if kind == "CUSTOM":
        if B is None:
            raise ModelMismatch("CUSTOM needs B")
        return make_test(B, design, "custom")
    if model is None:
        raise ModelMismatch(f"{kind} needs a covariance model")
    if model.n != design.n:
        raise ModelMismatch("model and design dimensions differ")
    if kind == "CLIFF_ORD":
        if model.sem is None:
            raise ModelMismatch("Cliff-Ord test needs an SEM model")
        W = model.sem.W
        return make_test(C @ (W + W.T) @ C.T, design, "cliff-ord")
    if kind == "POINT_OPTIMAL":
        if rho_bar is None or not (0 < rho_bar < model.a):
            raise ModelMismatch("point-optimal test needs 0 < rho_bar < a")
        Bm = -np.linalg.inv(model.sandwich(C, rho_bar))
        return make_test(Bm, design, f"point-optimal({rho_bar:g})")
    if kind == "LOCALLY_BEST":
        return make_test(C @ sigma_dot0(model) @ C.T, design, "locally-best")
    raise ValueError(f"unknown test kind {kind!r}")


def t_b(test, y):
    """Value of the statistic at ``y``; ``lambda_1(B)`` on span(X)."""
    y = np.asarray(y, dtype=float)
    Cy = test.design.C @ y
    den = Cy @ Cy
    ny = np.linalg.norm(y)
    if ny == 0 or np.sqrt(den) <= _tol.TOL.span * ny:
        return test.lmin
    val = (Cy @ test.B @ Cy) / den
    return float(min(max(val, test.lmin), test.lmax))


def t_b_many(test, Y):
    """Row-wise statistic for an array of shape (reps, n)."""
    Y = np.asarray(Y, dtype=float)
    CY = Y @ test.design.C.T
    den = np.einsum("ij,ij->i", CY, CY)
    num = np.einsum("ij,ij->i", CY @ test.B, CY)
    ny2 = np.einsum("ij,ij->i", Y, Y)
    on_span = den <= (_tol.TOL.span**2) * ny2
    out = np.empty(len(Y))
    ok = ~on_span
    out[ok] = num[ok] / den[ok]
    out[on_span] = test.lmin
    return np.clip(out, test.lmin, test.lmax)


def region_classify(test, kappa, y):
    """Locate ``y`` relative to the region ``{T_B > kappa}``."""
    if not test.nontrivial(kappa):
        # the region is all of R^n or empty, so nothing is on the boundary
        if test.degenerate:
            inside = test.lmin > kappa
        else:
            inside = kappa < test.lmin
        return RegionPoint("INTERIOR" if inside else "EXTERIOR", "TRIVIAL_REGION")
    if test.design.in_span(y):
        return RegionPoint("BOUNDARY", "SPAN_X")
    t = t_b(test, y)
    if abs(t - kappa) <= test.level_tol:
        return RegionPoint("BOUNDARY", "LEVEL_SET")
    return RegionPoint("INTERIOR" if t > kappa else "EXTERIOR", "VALUE_COMPARISON")


def maximal_invariant(design, y):
    """Normalized residual of ``y``, signed so the first nonzero entry is
    positive; zero on span(X)."""
    y = np.asarray(y, dtype=float)
    r = design.P_perp @ y
    nr, ny = np.linalg.norm(r), np.linalg.norm(y)
    if ny == 0 or nr <= _tol.TOL.span * ny:
        return np.zeros_like(y)
    return sign_fix(r / nr, tol=1e-12)
