"""Command line interface.

Examples
--------
::

    powertrap analyze --sem W.mtx --design X.csv --test cliff-ord --alpha 0.05
    powertrap alpha-star --sem W.mtx --k 0 --test poi --rho-bar 0.5
    powertrap reproduce ex2 --gamma 0.1 --out results/
"""
import argparse
import os
import sys

import numpy as np

from . import __version__
from .covariance import (
    ar1_model,
    concentration_direction,
    default_grid,
    example_model,
    limit_lambda,
    sem_model,
)
from .diagnostics import alpha_star, indistinguishability, trap_for_cliff_ord_and_poi
from .errors import PowerTrapError
from .invariant import build_b, t_b
from .io import dumps, load_matrix
from .limits import classify_limit
from .linalg import residual_basis
from .montecarlo import NoiseSpec, SimConfig, power_curve, reproduce_counterexample
from .quadform import critical_value, null_rejection_prob

EXIT_OK, EXIT_ERROR, EXIT_UNDETERMINED = 0, 1, 2

TEST_KINDS = {
    "cliff-ord": "CLIFF_ORD",
    "poi": "POINT_OPTIMAL",
    "lbi": "LOCALLY_BEST",
    "custom": "CUSTOM",
}


def _parse_grid(text, a):
    """``geom:LO:HI`` for ``a(1 - 2^-m)``, or a comma list of values
    given as fractions of ``a``."""
    if text is None:
        return None
    if text.startswith("geom"):
        parts = text.split(":")
        lo, hi = int(parts[1]), int(parts[2])
        return default_grid(a, lo, hi)
    return a * np.array([float(x) for x in text.split(",")])


def _model(args):
    if args.sem:
        return sem_model(load_matrix(args.sem, args.matrix_format))
    if args.ar1:
        return ar1_model(args.ar1, args.ar1_case)
    if args.example:
        n = args.n if args.n else (3 if args.example.upper() == "EX1" else 2)
        return example_model(args.example, n, gamma=args.gamma)
    raise SystemExit("one of --sem, --ar1, --example is required")


def _design(args, n):
    if args.design:
        if args.design == "intercept":
            X = np.ones((n, 1))
        else:
            X = load_matrix(args.design, "csv")
            if X.shape[0] != n and X.shape[1] == n:
                X = X.T
        return residual_basis(X)
    if args.k not in (None, 0):
        raise SystemExit("--k other than 0 needs --design")
    return residual_basis(np.zeros((n, 0)))


def _test(args, model, design):
    kind = TEST_KINDS[args.test]
    if kind == "CUSTOM":
        if not args.B:
            raise SystemExit("--test custom needs --B")
        return build_b(design, model, kind, B=load_matrix(args.B))
    if kind == "POINT_OPTIMAL":
        rho_bar = args.rho_bar if args.rho_bar is not None else 0.5 * model.a
        return build_b(design, model, kind, rho_bar=rho_bar)
    return build_b(design, model, kind)


def _kappa(args, test):
    if args.kappa is not None:
        return args.kappa, None
    if args.alpha is not None:
        return critical_value(test, args.alpha), args.alpha
    return None, None


def _config(args, model):
    beta = None
    if args.beta:
        beta = np.array([float(x) for x in args.beta.split(",")])
    grid = _parse_grid(args.grid, model.a) if args.grid else None
    return SimConfig(
        beta=beta, sigma=args.sigma, rho_grid=grid, reps=args.reps,
        seed=args.seed, parallel_chunks=args.workers,
        noise=NoiseSpec.parse(args.noise),
    )


def _emit(args, report, curves=()):
    text = dumps(report)
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        with open(os.path.join(args.out, "report.json"), "w",
                  encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        for name, curve in curves:
            curve.to_csv(os.path.join(args.out, f"{name}.csv"))
    else:
        sys.stdout.write(text)


def _limit_grid(args, model):
    return _parse_grid(args.grid, model.a) if args.grid else None


def _model_info(model, grid):
    info = {"kind": model.kind, "n": model.n, "a": model.a, "params": model.params}
    try:
        conc = concentration_direction(model, grid)
        info["concentration"] = {
            "e_hat": conc.e_hat, "residual_last": conc.residuals[-1],
            "passed": conc.passed,
        }
    except PowerTrapError as exc:
        info["concentration"] = {"error": _err(exc)}
    info["e"] = model.analytic_e
    return info


def _err(exc):
    return {"type": type(exc).__name__, "module": getattr(exc, "module", ""),
            "message": str(exc)}


def cmd_analyze(args):
    model = _model(args)
    design = _design(args, model.n)
    test = _test(args, model, design)
    kappa, alpha = _kappa(args, test)
    grid = _limit_grid(args, model)
    report = {"command": "analyze", "model": _model_info(model, grid),
              "test": _test_info(test), "errors": []}
    code = EXIT_OK
    e = model.analytic_e
    if e is None and "e_hat" in report["model"]["concentration"]:
        e = report["model"]["concentration"]["e_hat"]
    if e is not None:
        report["t_b_e"] = t_b(test, e)
    try:
        report["Lambda"] = limit_lambda(model, grid)
    except PowerTrapError as exc:
        report["errors"].append(_err(exc))
    if kappa is not None:
        report["kappa"] = kappa
        report["alpha"] = alpha
        report["size"] = null_rejection_prob(test, kappa)
        try:
            lim = classify_limit(test, kappa, model, grid)
            report["limit"] = _limit_info(lim)
            if lim.limit is None:
                code = EXIT_UNDETERMINED
        except PowerTrapError as exc:
            report["errors"].append(_err(exc))
            code = EXIT_ERROR
    try:
        report["alpha_star"] = alpha_star(test, model, grid)
    except PowerTrapError as exc:
        report["errors"].append(_err(exc))
    report["distinguishability"] = _dist_info(indistinguishability(model, design))
    if model.sem is not None and args.test in ("cliff-ord", "poi"):
        try:
            rho_bar = args.rho_bar if args.rho_bar is not None else 0.5 * model.a
            report["trap_verdicts"] = trap_for_cliff_ord_and_poi(model, design, rho_bar)
        except PowerTrapError as exc:
            report["trap_verdicts"] = {"error": _err(exc)}
    curves = []
    if args.reps and kappa is not None:
        curve = power_curve(test, kappa, model, _config(args, model))
        report["power_curve"] = curve.to_dict()
        curves.append(("power_curve", curve))
    _emit(args, report, curves)
    return code


def _test_info(test):
    return {"name": test.name, "n_minus_k": test.design.m, "k": test.design.k,
            "lambda_1": test.lmin, "lambda_max": test.lmax,
            "degenerate": test.degenerate}


def _limit_info(lim):
    return {
        "case": lim.case, "limit": lim.limit, "rule": lim.rule, "q": lim.q,
        "kappa": lim.kappa, "t_b_e": lim.t_b_e, "assumptions": lim.assumptions,
        "estimate": lim.estimate, "notes": lim.notes,
    }


def _dist_info(rep):
    return {
        "indistinguishable": rep.indistinguishable, "max_deviation": rep.max_deviation,
        "structural": rep.structural, "structural_lambda": rep.structural_lambda,
        "grid": rep.grid, "delta": rep.delta, "assumptions": rep.assumptions,
    }


def cmd_limit(args):
    model = _model(args)
    design = _design(args, model.n)
    test = _test(args, model, design)
    kappa, alpha = _kappa(args, test)
    if kappa is None:
        raise SystemExit("limit needs --kappa or --alpha")
    lim = classify_limit(test, kappa, model, _limit_grid(args, model))
    _emit(args, {"command": "limit", "test": _test_info(test), "alpha": alpha,
                 "limit": _limit_info(lim)})
    return EXIT_OK if lim.limit is not None else EXIT_UNDETERMINED


def cmd_alpha_star(args):
    model = _model(args)
    design = _design(args, model.n)
    test = _test(args, model, design)
    rep = alpha_star(test, model, _limit_grid(args, model))
    _emit(args, {"command": "alpha-star", "test": _test_info(test), "alpha_star": rep})
    return EXIT_OK


def cmd_simulate(args):
    model = _model(args)
    design = _design(args, model.n)
    test = _test(args, model, design)
    kappa, alpha = _kappa(args, test)
    if kappa is None:
        raise SystemExit("simulate needs --kappa or --alpha")
    curve = power_curve(test, kappa, model, _config(args, model))
    _emit(args, {"command": "simulate", "test": _test_info(test), "alpha": alpha,
                 "power_curve": curve.to_dict()}, [("power_curve", curve)])
    return EXIT_OK


def cmd_distinguish(args):
    model = _model(args)
    design = _design(args, model.n)
    rep = indistinguishability(model, design, _parse_grid(args.grid, model.a))
    _emit(args, {"command": "distinguish", "distinguishability": _dist_info(rep)})
    return EXIT_OK


def cmd_reproduce(args):
    cfg = SimConfig(reps=args.reps, seed=args.seed, parallel_chunks=args.workers,
                    noise=NoiseSpec.parse(args.noise))
    curve, comp, info = reproduce_counterexample(
        args.which, cfg, alpha=args.alpha or 0.05, n=args.n or 3, gamma=args.gamma,
    )
    info.update({"command": "reproduce", "power_curve": curve.to_dict(),
                 "complement_curve": comp.to_dict()})
    _emit(args, info, [(f"{args.which.lower()}_curve", curve),
                       (f"{args.which.lower()}_complement", comp)])
    return EXIT_OK


def _common(p, model=True, test=True):
    if model:
        src = p.add_mutually_exclusive_group()
        src.add_argument("--sem", metavar="W", help="weights matrix (.mtx or .csv)")
        src.add_argument("--ar1", type=int, metavar="N", help="AR(1) with N observations")
        src.add_argument("--example", choices=["ex1", "ex2", "stretch"])
        p.add_argument("--ar1-case", default="I", choices=["I", "II"])
        p.add_argument("--matrix-format", choices=["csv", "mm"])
        p.add_argument("--design", help="X as headerless CSV, or 'intercept'")
        p.add_argument("--k", type=int, help="0 for no regressors")
        p.add_argument("--grid", help="'geom:LO:HI' or comma list of rho/a values")
    if test:
        p.add_argument("--test", choices=list(TEST_KINDS), default="cliff-ord")
        p.add_argument("--B", help="matrix for --test custom")
        p.add_argument("--rho-bar", type=float)
        k = p.add_mutually_exclusive_group()
        k.add_argument("--kappa", type=float)
        k.add_argument("--alpha", type=float)
    p.add_argument("--n", type=int, help="dimension for the built-in examples")
    p.add_argument("--gamma", type=float, default=0.1)
    p.add_argument("--reps", type=int, default=None)
    p.add_argument("--seed", type=int, default=20240611)
    p.add_argument("--noise", default="gaussian", help="gaussian or tNU, e.g. t5")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--beta", help="comma-separated regression coefficients")
    p.add_argument("--sigma", type=float, default=1.0)
    p.add_argument("--out", help="output directory (default: JSON to stdout)")


def build_parser():
    p = argparse.ArgumentParser(
        prog="powertrap",
        description="Limiting power and zero-power-trap diagnostics for "
                    "invariant tests of correlation in linear models.",
    )
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)
    for name, fn, reps in (
        ("analyze", cmd_analyze, 0),
        ("limit", cmd_limit, 0),
        ("alpha-star", cmd_alpha_star, 0),
        ("simulate", cmd_simulate, 10_000),
    ):
        s = sub.add_parser(name)
        _common(s)
        s.set_defaults(func=fn, default_reps=reps)
    s = sub.add_parser("distinguish")
    _common(s, test=False)
    s.set_defaults(func=cmd_distinguish, default_reps=0)
    s = sub.add_parser("reproduce")
    s.add_argument("which", choices=["ex1", "ex2"])
    s.add_argument("--alpha", type=float)
    _common(s, model=False, test=False)
    s.set_defaults(func=cmd_reproduce, default_reps=200_000)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.reps is None:
        args.reps = args.default_reps
    try:
        return args.func(args)
    except PowerTrapError as exc:
        err = _err(exc)
        sys.stderr.write(f"error [{err['module']}] {err['type']}: {err['message']}\n")
        return EXIT_ERROR
    except (OSError, ValueError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
