"""Monte Carlo rejection probabilities for y = X beta + sigma L(rho) z.

Random numbers are drawn in fixed blocks of ``CHUNK`` replications. Block
``j`` at grid index ``i`` uses a Philox generator keyed by
``(seed, stream, i, j)``, so a given replication always sees the same
draws no matter how many workers run the blocks. Rejection counts are
integers, so the reduction is exact.
"""
import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy import stats

from . import tolerances as _tol
from .errors import IllConditioned
from .invariant import QuadFormTest, t_b_many

__all__ = [
    "NoiseSpec",
    "SimConfig",
    "PowerCurve",
    "chunk_rng",
    "factor",
    "estimate_rejection",
    "power_curve",
    "simulate_slm",
    "null_montecarlo",
    "reproduce_counterexample",
    "ex1_region",
    "ex2_region",
]

CHUNK = 16_384
ACCEPTANCE_REPS = 200_000
SMOKE_REPS = 10_000


@dataclass(frozen=True)
class NoiseSpec:
    """Spherically symmetric noise with identity covariance.

    family : 'GAUSSIAN', 'SPHERICAL_T' (needs ``nu > 2``) or
    'SCALE_MIXTURE' (needs ``radial(rng, m)`` returning positive scale
    factors with mean square 1).
    """

    family: str = "GAUSSIAN"
    nu: Optional[float] = None
    radial: Optional[Callable] = None

    def __post_init__(self):
        fam = self.family.upper()
        object.__setattr__(self, "family", fam)
        if fam == "SPHERICAL_T" and not (self.nu and self.nu > 2):
            raise ValueError("spherical t noise needs nu > 2")
        if fam == "SCALE_MIXTURE" and self.radial is None:
            raise ValueError("scale mixture needs a radial sampler")
        if fam not in ("GAUSSIAN", "SPHERICAL_T", "SCALE_MIXTURE"):
            raise ValueError(f"unknown noise family {self.family!r}")

    @classmethod
    def parse(cls, text):
        """``gaussian``, ``t5``, ``t:7.5``."""
        s = text.strip().lower()
        if s in ("gaussian", "normal"):
            return cls()
        if s.startswith("t"):
            return cls("SPHERICAL_T", float(s[1:].lstrip(":")))
        raise ValueError(f"cannot parse noise spec {text!r}")

    @property
    def label(self):
        if self.family == "SPHERICAL_T":
            return f"spherical_t({self.nu:g})"
        return self.family.lower()

    def draw(self, rng, m, n):
        z = rng.standard_normal((m, n))
        if self.family == "SPHERICAL_T":
            chi = rng.chisquare(self.nu, m)
            z *= np.sqrt((self.nu - 2.0) / chi)[:, None]
        elif self.family == "SCALE_MIXTURE":
            z *= np.asarray(self.radial(rng, m), dtype=float)[:, None]
        return z


@dataclass
class SimConfig:
    beta: Optional[np.ndarray] = None
    sigma: float = 1.0
    rho_grid: Optional[np.ndarray] = None
    reps: int = SMOKE_REPS
    seed: int = 0
    parallel_chunks: int = 1
    noise: NoiseSpec = field(default_factory=NoiseSpec)
    root: str = "symmetric"   # or "sem": L = (I - rho W)^{-1}

    def __post_init__(self):
        if self.reps < 1:
            raise ValueError("reps must be positive")
        if not self.sigma > 0:
            raise ValueError("sigma must be positive")


@dataclass
class PowerCurve:
    rho: np.ndarray
    estimate: np.ndarray
    stderr: np.ndarray
    reps: np.ndarray
    seed: int
    noise: str
    test: str
    kappa: Optional[float] = None

    def rows(self):
        for r, p, s, m in zip(self.rho, self.estimate, self.stderr, self.reps):
            yield float(r), float(p), float(s), int(m)

    def to_dict(self):
        return {
            "test": self.test,
            "kappa": self.kappa,
            "seed": int(self.seed),
            "noise": self.noise,
            "points": [
                {"rho": r, "estimate": p, "stderr": s, "reps": m}
                for r, p, s, m in self.rows()
            ],
        }

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["rho", "estimate", "stderr", "reps"])
            for r, p, s, m in self.rows():
                w.writerow([f"{r:.12g}", f"{p:.12g}", f"{s:.12g}", m])

    def to_json(self, path):
        from .io import dump_json

        dump_json(self.to_dict(), path)


def chunk_rng(seed, stream, rho_index, chunk):
    seed = int(seed) & (2**64 - 1)
    key = [seed & 0xFFFFFFFF, seed >> 32, int(stream), int(rho_index), int(chunk)]
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(key)))


def factor(model, rho, root="symmetric"):
    """Square root ``L`` of ``Sigma(rho)`` and the condition number.

    The symmetric root comes from an eigendecomposition with eigenvalues
    clamped at ``clamp * lambda_max``. Raises :class:`IllConditioned`
    above ``cond_max``.
    """
    S = model.sigma(rho)
    w, V = np.linalg.eigh(S)
    cond = float(w[-1] / w[0]) if w[0] > 0 else math.inf
    if cond > _tol.TOL.cond_max:
        raise IllConditioned(
            f"Sigma({rho:.6g}) has condition number {cond:.3g}; "
            "move rho further from a"
        )
    if root == "sem":
        if model.sqrt_fn is None:
            raise ValueError("root='sem' needs an SEM model")
        return model.sqrt_fn(rho), cond
    w = np.maximum(w, _tol.TOL.clamp * w[-1])
    return (V * np.sqrt(w)) @ V.T, cond


def _statistic(test):
    if isinstance(test, QuadFormTest):
        return lambda Y: t_b_many(test, Y)
    return test


def _count(stat, kappa, L, mean, sigma, noise, seed, stream, idx, reps, workers):
    n = L.shape[0]
    nchunks = -(-reps // CHUNK)

    def one(j):
        m = min(CHUNK, reps - j * CHUNK)
        rng = chunk_rng(seed, stream, idx, j)
        z = noise.draw(rng, m, n)
        Y = sigma * (z @ L.T)
        if mean is not None:
            Y += mean
        return int(np.count_nonzero(stat(Y) > kappa))

    if workers > 1 and nchunks > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            return sum(ex.map(one, range(nchunks)))
    return sum(one(j) for j in range(nchunks))


def _mean(test, config):
    if config.beta is None:
        return None
    X = test.design.X
    beta = np.asarray(config.beta, dtype=float)
    if beta.size == 0:
        return None
    return X @ beta


def estimate_rejection(test, kappa, model, rho, config, rho_index=0, stream=0):
    """Fraction of draws with ``T(y) > kappa`` at one value of rho.

    ``test`` is a :class:`QuadFormTest` or any vectorized statistic
    ``Y -> values`` acting on rows.

    Returns
    -------
    (float, float)
        Estimate and its standard error.
    """
    if not 0 <= rho < model.a:
        raise ValueError("rho must lie in [0, a)")
    L, _ = factor(model, rho, config.root)
    mean = _mean(test, config) if isinstance(test, QuadFormTest) else None
    hits = _count(_statistic(test), kappa, L, mean, config.sigma, config.noise,
                  config.seed, stream, rho_index, config.reps, config.parallel_chunks)
    p = hits / config.reps
    return p, math.sqrt(p * (1 - p) / config.reps)


def default_curve_grid(a, m_hi=12):
    return np.concatenate([[0.0], a * (1 - 2.0 ** -np.arange(1, m_hi + 1))])


def power_curve(test, kappa, model, config, name=None, stream=0):
    """Rejection probabilities over ``config.rho_grid`` (default ends at
    ``a (1 - 2**-12)``)."""
    grid = config.rho_grid
    grid = default_curve_grid(model.a) if grid is None else np.asarray(grid, float)
    if np.any(np.diff(grid) <= 0):
        raise ValueError("rho grid must be increasing")
    est, se = [], []
    for i, r in enumerate(grid):
        p, s = estimate_rejection(test, kappa, model, r, config, i, stream)
        est.append(p)
        se.append(s)
    return PowerCurve(
        grid, np.array(est), np.array(se), np.full(grid.size, config.reps),
        config.seed, config.noise.label, name or getattr(test, "name", "custom"),
        None if kappa is None else float(kappa),
    )


def simulate_slm(test, kappa, model, config, stream=0):
    """Spatial lag model ``y = (I - rho W)^{-1} (X beta + sigma eps)``."""
    W = model.sem.W
    n = W.shape[0]
    grid = config.rho_grid
    grid = default_curve_grid(model.a) if grid is None else np.asarray(grid, float)
    stat = _statistic(test)
    base = _mean(test, config)
    est, se = [], []
    for i, r in enumerate(grid):
        L = np.linalg.solve(np.eye(n) - r * W, np.eye(n))
        mean = None if base is None else L @ base
        hits = _count(stat, kappa, L, mean, config.sigma, config.noise,
                      config.seed, stream, i, config.reps, config.parallel_chunks)
        p = hits / config.reps
        est.append(p)
        se.append(math.sqrt(p * (1 - p) / config.reps))
    return PowerCurve(
        grid, np.array(est), np.array(se), np.full(grid.size, config.reps),
        config.seed, config.noise.label, "slm:" + getattr(test, "name", "custom"),
        float(kappa),
    )


def null_montecarlo(test, kappa, draws, seed=0, workers=1):
    """Monte Carlo size of ``{T_B > kappa}`` with iid Gaussian errors."""
    L = np.eye(test.design.n)
    hits = _count(_statistic(test), kappa, L, None, 1.0, NoiseSpec(), seed,
                  1, 0, draws, workers)
    p = hits / draws
    return p, math.sqrt(p * (1 - p) / draws)


# ---------------------------------------------------------------- examples

def ex1_region(e, alpha):
    """Double cone of null size ``alpha`` around ``e`` with the line
    through ``e`` removed.

    Returns ``(inside, t)`` where ``inside(Y)`` flags rows in the region and
    ``t`` is the cosine of the cap half-angle.
    """
    e = np.asarray(e, dtype=float)
    e = e / np.linalg.norm(e)
    n = e.size
    t = math.sqrt(stats.beta.isf(alpha, 0.5, 0.5 * (n - 1)))

    def inside(Y):
        Y = np.atleast_2d(Y)
        proj = Y @ e
        ny = np.sqrt(np.einsum("ij,ij->i", Y, Y))
        R = Y - np.outer(proj, e)
        off = np.sqrt(np.einsum("ij,ij->i", R, R))
        return (np.abs(proj) >= t * ny) & (off > 1e-12 * ny)

    return inside, t


def ex2_region(Y):
    Y = np.atleast_2d(Y)
    return Y[:, 0] * Y[:, 1] >= 0


def _certify_ex1(e, inside, t):
    e = np.asarray(e, float) / np.linalg.norm(e)
    h = np.linalg.svd(np.eye(e.size) - np.outer(e, e))[0][:, 0]
    eps0 = 0.5 * math.sqrt(1 - t * t) / t
    approach = [e + eps0 * 2.0**-j * h for j in range(0, 40, 4)]
    return {
        "point_in_region": bool(inside(e)[0]),
        "approach_points_in_region": bool(all(inside(y)[0] for y in approach)),
        "approach_distance_min": eps0 * 2.0**-36,
        "on_boundary": bool((not inside(e)[0]) and all(inside(y)[0] for y in approach)),
        "cap_cosine": t,
    }


def _certify_ex2():
    e = np.array([0.0, 1.0])
    approach = [np.array([-eps, 1.0]) for eps in 2.0 ** -np.arange(0, 40, 4)]
    outside = [not ex2_region(y)[0] for y in approach]
    return {
        "point_in_region": bool(ex2_region(e)[0]),
        "approach_points_outside_region": bool(all(outside)),
        "on_boundary": bool(ex2_region(e)[0] and all(outside)),
    }


def reproduce_counterexample(which, config, alpha=0.05, n=3, gamma=0.1, threshold=0.8):
    """Run one of the two boundary counterexamples.

    Returns ``(curve, complement_curve, info)``. For ``EX1`` the region is
    the cap cone of size ``alpha`` around ``e`` minus the line through
    ``e``; ``e`` is on its boundary yet the power tends to 1. For ``EX2``
    the region is ``{y1 y2 >= 0}`` under a rotating direction with speed
    set by ``gamma``.
    """
    from .covariance import example_model

    which = which.upper()
    if which == "EX1":
        model = example_model("EX1", n)
        inside, t = ex1_region(model.analytic_e, alpha)
        grid = config.rho_grid
        if grid is None:
            grid = np.concatenate([[0.0], 1 - 2.0 ** -np.arange(2, 17, 2)])
        cfg = _with_grid(config, grid)
        stat = lambda Y: inside(Y).astype(float)  # noqa: E731
        comp = lambda Y: (~inside(Y)).astype(float)  # noqa: E731
        curve = power_curve(stat, 0.5, model, cfg, "ex1-region")
        ccurve = power_curve(comp, 0.5, model, cfg, "ex1-complement", stream=1)
        info = {
            "example": "EX1",
            "n": n,
            "alpha": alpha,
            "null_size_exact": float(stats.beta.sf(t * t, 0.5, 0.5 * (n - 1))),
            "boundary_certificate": _certify_ex1(model.analytic_e, inside, t),
            "final_estimate": float(curve.estimate[-1]),
            "complement_final_estimate": float(ccurve.estimate[-1]),
        }
        return curve, ccurve, info
    if which == "EX2":
        model = example_model("EX2", 2, gamma=gamma)
        grid = config.rho_grid
        if grid is None:
            grid = np.concatenate([[0.0], 1 - 2.0 ** -np.arange(1, 15)])
        cfg = _with_grid(config, grid)
        stat = lambda Y: ex2_region(Y).astype(float)  # noqa: E731
        comp = lambda Y: (~ex2_region(Y)).astype(float)  # noqa: E731
        curve = power_curve(stat, 0.5, model, cfg, "ex2-region")
        ccurve = power_curve(comp, 0.5, model, cfg, "ex2-complement", stream=1)
        p = float(curve.estimate[-1])
        info = {
            "example": "EX2",
            "gamma": gamma,
            "null_size_exact": 0.5,
            "boundary_certificate": _certify_ex2(),
            "final_estimate": p,
            "complement_final_estimate": float(ccurve.estimate[-1]),
            "threshold": threshold,
            "exceeds_threshold": bool(p >= threshold),
        }
        return curve, ccurve, info
    raise ValueError(f"unknown counterexample {which!r}")


def _with_grid(config, grid):
    from dataclasses import replace

    return replace(config, rho_grid=np.asarray(grid, dtype=float))
