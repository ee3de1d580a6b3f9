"""Command-line front end: sampling, density grids, fitting, simulation.

Exit codes: 0 on success, 1 on usage errors (bad flags, malformed CSV),
2 on numeric or convergence failure (a fit that does not converge still
writes its result file and exits 2).
"""

from __future__ import annotations

import argparse
import json
import os
import re
import sys

import numpy as np

from . import estimate, simharness
from .circular import PGLParams, VMParams, pgl_logpdf, pgl_logpdf_exact, pn_logpdf, sample_pgl, save_angles, vm_logpdf
from .gl import GLParams, load_observations, logpdf_al, logpdf_gl_uni, logpdf_laplace, sample_gl, save_observations
from .quadrature import gamma_rule

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NUMERIC = 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """argparse that raises instead of exiting, so usage errors map to
    exit code 1, and that accepts comma-separated negative numbers
    (e.g. ``--theta -2,0``) as option values."""

    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        self._negative_number_matcher = re.compile(r"^-\d+(\.\d+)?(,-?\d+(\.\d+)?)*$")

    def error(self, message):
        raise UsageError(message)


def _floats(text: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t != ""]
    except ValueError as err:
        raise UsageError(f"expected comma-separated numbers, got {text!r}") from err


def _matrix(text: str, d: int) -> np.ndarray:
    vals = _floats(text)
    if len(vals) != d * d:
        raise UsageError(f"expected {d * d} row-major matrix entries, got {len(vals)}")
    return np.asarray(vals).reshape(d, d)


def _resolve_seed(args) -> int:
    if getattr(args, "seed", None) is not None:
        return args.seed
    env = os.environ.get("GLFIT_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError as err:
            raise UsageError(f"GLFIT_SEED must be an integer, got {env!r}") from err
    return 0


def _require(args, names):
    for name in names:
        if getattr(args, name.replace("-", "_"), None) is None:
            raise UsageError(f"--{name} is required for --dist {args.dist}")


def _build_params(args):
    dist = args.dist
    if dist == "laplace":
        _require(args, ["theta", "sigma"])
        return GLParams.univariate(_floats(args.theta)[0], args.sigma, 0.0, 1.0)
    if dist == "al":
        _require(args, ["theta", "sigma", "mu"])
        return GLParams.univariate(_floats(args.theta)[0], args.sigma, _floats(args.mu)[0], 1.0)
    if dist == "gl":
        _require(args, ["theta", "sigma", "mu", "alpha"])
        return GLParams.univariate(_floats(args.theta)[0], args.sigma, _floats(args.mu)[0], args.alpha)
    if dist == "mgl":
        _require(args, ["theta", "sigma-matrix", "mu", "alpha"])
        theta = _floats(args.theta)
        d = len(theta)
        return GLParams(theta, _matrix(args.sigma_matrix, d), _floats(args.mu), args.alpha)
    if dist == "pgl":
        _require(args, ["theta", "phi", "rho", "alpha"])
        theta = _floats(args.theta)
        if len(theta) != 2:
            raise UsageError("--theta must have 2 components for pgl")
        return PGLParams(theta, args.phi, args.rho, args.alpha)
    if dist == "pn":
        _require(args, ["theta", "phi", "rho"])
        theta = _floats(args.theta)
        if len(theta) != 2:
            raise UsageError("--theta must have 2 components for pn")
        return PGLParams(theta, args.phi, args.rho, 1.0)
    if dist == "vm":
        _require(args, ["loc", "kappa"])
        loc = np.deg2rad(args.loc) if args.degrees else args.loc
        return VMParams(loc, args.kappa)
    raise UsageError(f"unknown distribution {dist!r}")


def _add_param_flags(parser):
    parser.add_argument("--theta", help="location; comma-separated for vectors")
    parser.add_argument("--sigma", type=float, help="scale (univariate families)")
    parser.add_argument("--sigma-matrix", help="row-major scatter matrix entries, e.g. 2,1,1,2")
    parser.add_argument("--mu", help="asymmetry; comma-separated for vectors")
    parser.add_argument("--alpha", type=float, help="shape parameter")
    parser.add_argument("--phi", type=float, help="projected-family scale (Sigma11 = phi^2)")
    parser.add_argument("--rho", type=float, help="projected-family correlation in (-1, 1)")
    parser.add_argument("--loc", type=float, help="von Mises location (radians)")
    parser.add_argument("--kappa", type=float, help="von Mises concentration")
    parser.add_argument("--degrees", action="store_true", help="interpret input angles as degrees")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="glfit", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_sample = sub.add_parser("sample", help="draw observations and write them as CSV")
    p_sample.add_argument("--dist", required=True, choices=["laplace", "al", "gl", "mgl", "pgl", "pn", "vm"])
    _add_param_flags(p_sample)
    p_sample.add_argument("-n", "--size", type=int, required=True, help="number of draws")
    p_sample.add_argument("--seed", type=int, help="RNG seed (fallback: GLFIT_SEED, then 0)")
    p_sample.add_argument("-o", "--output", required=True, help="output CSV path")

    p_density = sub.add_parser("density", help="write a CSV grid of x, log-density, density")
    p_density.add_argument("--dist", required=True, choices=["laplace", "al", "gl", "pgl", "pn", "vm"])
    _add_param_flags(p_density)
    p_density.add_argument("--grid", type=int, default=361, help="number of grid points")
    p_density.add_argument("--min", type=float, help="grid lower bound (linear families)")
    p_density.add_argument("--max", type=float, help="grid upper bound (linear families)")
    p_density.add_argument("--nodes", type=int, default=20, help="quadrature points for pgl")
    p_density.add_argument("--exact", action="store_true", help="use the adaptive-integration pgl oracle")
    p_density.add_argument("-o", "--output", required=True, help="output CSV path")

    p_fit = sub.add_parser("fit", help="fit a model to CSV data and write a JSON result")
    p_fit.add_argument("--dist", required=True, choices=["gl", "mgl", "pgl", "pn", "vm"])
    p_fit.add_argument("--method", default="gq-qn", help="gq-nm | gq-bfgs | gq-qn | direct-ml")
    p_fit.add_argument("--nodes", type=int, default=20, help="quadrature points H")
    p_fit.add_argument("--maxiter", type=int, default=5000, help="optimizer iteration cap")
    p_fit.add_argument("--degrees", action="store_true", help="interpret input angles as degrees")
    p_fit.add_argument("-i", "--input", required=True, help="input CSV path")
    p_fit.add_argument("-o", "--output", required=True, help="output JSON path")

    p_sim = sub.add_parser("simulate", help="run the built-in benchmark scenarios")
    p_sim.add_argument("--part", type=int, required=True, choices=[1, 2])
    p_sim.add_argument("--reps", type=int, default=500, help="replications per scenario")
    p_sim.add_argument("--sizes", default="30,100,500", help="comma-separated sample sizes")
    p_sim.add_argument("--methods", help="comma-separated method names (default: all for the part)")
    p_sim.add_argument("--seed", type=int, help="base seed (fallback: GLFIT_SEED, then 0)")
    p_sim.add_argument("--jobs", type=int, default=1, help="parallel workers")
    p_sim.add_argument("--out", required=True, help="output directory for summary/replications CSVs")
    return parser


# ----------------------------------------------------------------------
# Subcommands
# ----------------------------------------------------------------------

def _cmd_sample(args) -> int:
    params = _build_params(args)
    if args.size < 1:
        raise UsageError("-n must be >= 1")
    seed = _resolve_seed(args)
    rng = np.random.default_rng(seed)
    if args.dist in ("laplace", "al", "gl", "mgl"):
        draws = sample_gl(params, args.size, rng)
        save_observations(draws, args.output)
    elif args.dist in ("pgl", "pn"):
        if args.dist == "pn":
            # projected normal = large-shape limit; draw directly from the normal
            cov = params.sigma
            z = rng.multivariate_normal(params.theta, cov, size=args.size, method="cholesky")
            angles = np.arctan2(z[:, 1], z[:, 0])
            from .circular import wrap_angle

            save_angles(wrap_angle(angles), args.output)
        else:
            save_angles(sample_pgl(params, args.size, rng), args.output)
    else:  # vm
        angles = rng.vonmises(params.location, params.concentration, size=args.size)
        save_angles(angles, args.output)
    return EXIT_OK


def _cmd_density(args) -> int:
    params = _build_params(args)
    if args.grid < 2:
        raise UsageError("--grid must be >= 2")
    circular_family = args.dist in ("pgl", "pn", "vm")
    if circular_family:
        grid = -np.pi + 2.0 * np.pi * (np.arange(args.grid) + 1.0) / args.grid
    else:
        if args.min is None or args.max is None or args.max <= args.min:
            raise UsageError("--min and --max (with max > min) are required for linear families")
        grid = np.linspace(args.min, args.max, args.grid)

    if args.dist == "laplace":
        logpdf = logpdf_laplace(grid, params.theta[0], float(np.sqrt(params.sigma[0, 0])))
    elif args.dist == "al":
        logpdf = logpdf_al(grid, params.theta[0], float(np.sqrt(params.sigma[0, 0])), params.mu[0])
    elif args.dist == "gl":
        logpdf = logpdf_gl_uni(grid, params)
    elif args.dist == "pgl":
        if args.exact:
            logpdf = pgl_logpdf_exact(grid, params)
        else:
            logpdf = pgl_logpdf(grid, params, gamma_rule(params.alpha, args.nodes))
    elif args.dist == "pn":
        logpdf = pn_logpdf(grid, params.theta, params.sigma)
    else:  # vm
        logpdf = vm_logpdf(grid, params)
    out = np.column_stack([grid, logpdf, np.exp(logpdf)])
    np.savetxt(args.output, out, fmt="%.17g", delimiter=",")
    return EXIT_OK


def _cli_method_name(method: str, nodes: int) -> str:
    mapping = {"gq-nm": "nm", "gq-bfgs": "bfgs", "gq-qn": "qn"}
    if method == "direct-ml":
        return "direct_ml"
    if method in mapping:
        return f"gq_{mapping[method]}_h{nodes}"
    raise UsageError(f"unknown method {method!r}")


def _cmd_fit(args) -> int:
    if args.dist in ("gl", "mgl"):
        data = load_observations(args.input)
        if args.dist == "gl" and data.shape[1] != 1:
            raise UsageError("gl expects single-column data; use mgl for vectors")
        fit = estimate.fit_gl(data, method=_cli_method_name(args.method, args.nodes), maxiter=args.maxiter)
    else:
        from .circular import read_angle_column, wrap_angle

        raw = read_angle_column(args.input)
        angles = wrap_angle(np.deg2rad(raw) if args.degrees else raw)
        if args.dist == "pgl":
            name = _cli_method_name(args.method, args.nodes)
            if name == "direct_ml":
                raise UsageError("direct-ml is not available for pgl")
            fit = estimate.fit_pgl(angles, method=name, maxiter=args.maxiter)
        elif args.dist == "pn":
            fit = estimate.fit_pn(angles, maxiter=args.maxiter)
        else:
            fit = estimate.fit_vm(angles)
    with open(args.output, "w", encoding="utf-8") as fh:
        json.dump(fit.to_dict(), fh, indent=2)
        fh.write("\n")
    return EXIT_OK if fit.converged else EXIT_NUMERIC


def _cmd_simulate(args) -> int:
    sizes = [int(v) for v in _floats(args.sizes)]
    methods = args.methods.split(",") if args.methods else None
    seed = _resolve_seed(args)
    scenarios = simharness.builtin_scenarios(
        args.part, sizes=sizes, replications=args.reps, base_seed=seed, methods=methods
    )
    records = simharness.run_scenarios(scenarios, jobs=args.jobs)
    table = simharness.summarize(records)
    simharness.emit_report(table, records, args.out)
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "sample":
            return _cmd_sample(args)
        if args.command == "density":
            return _cmd_density(args)
        if args.command == "fit":
            return _cmd_fit(args)
        if args.command == "simulate":
            return _cmd_simulate(args)
        raise UsageError(f"unknown command {args.command!r}")
    except (UsageError, ValueError, OSError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_USAGE
    except RuntimeError as err:
        print(f"numeric error: {err}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
