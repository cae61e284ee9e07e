"""Numerical tolerances used across the package.

All defaults live in one place. Override them temporarily with::

    with override(eigvec=1e-6):
        ...
"""
from contextlib import contextmanager
from dataclasses import dataclass, fields, replace


@dataclass(frozen=True)
class Tolerances:
    sym: float = 1e-10        # relative symmetry check, times max|A|
    psd: float = 1e-10        # relative to lambda_max
    ortho: float = 1e-10
    resid: float = 1e-8
    rank: float = 1e-10       # singular values relative to sigma_max
    span: float = 1e-12       # ||C y|| <= span * ||y|| means y in span(X)
    e_span: float = 1e-9      # looser version for a concentration direction
    drop: float = 1e-12       # quadratic-form weights relative to max|w|
    level: float = 1e-9       # boundary band, times eigenvalue spread of B
    eigvec: float = 1e-8
    ambiguous: float = 1e-4
    check: float = 1e-3
    indist: float = 1e-8
    stable: float = 1e-6      # eigenspace projector drift
    injective: float = 1e-8
    cond_max: float = 1e14
    clamp: float = 1e-14


TOL = Tolerances()


def get():
    return TOL


@contextmanager
def override(**kwargs):
    """Temporarily replace some tolerances."""
    global TOL
    names = {f.name for f in fields(Tolerances)}
    bad = set(kwargs) - names
    if bad:
        raise KeyError(f"unknown tolerance(s): {sorted(bad)}")
    old = TOL
    TOL = replace(old, **kwargs)
    try:
        yield TOL
    finally:
        TOL = old
