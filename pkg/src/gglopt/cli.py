"""Command-line front end: ``solve``, ``select``, ``generate`` and ``benchmark``.

Exit codes: 0 success, 1 internal error, 2 invalid input, 3 solver did not converge.
"""
from __future__ import annotations

import argparse
import logging
import os
import sys
import time
from dataclasses import asdict, replace

import numpy as np

from . import __version__
from .admm import kkt_residual, solve
from .blocks import connected_components, fragmenting_lambda, solve_sgl_blockwise, threshold_graph
from .core import CovInput, Family, PenaltySpec, SolverConfig, ValidationError
from .io import read_matrix, sha256_file, write_edges, write_json, write_matrix, write_text
from .selection import ParameterGrid, SelectionError, default_lambda_grid, grid_search
from .synth import RNG_NAME, generate_block_precision, generate_latent_precision, generate_precision, sample_covariance

EXIT_OK, EXIT_INTERNAL, EXIT_INVALID, EXIT_NOT_CONVERGED = 0, 1, 2, 3

logger = logging.getLogger("gglopt")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _floats(text):
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _ints(text):
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _paths(text):
    return [x for x in text.split(",") if x]


def _add_solver_flags(p):
    p.add_argument("--rho", type=float, default=1.0)
    p.add_argument("--max-iter", type=int, default=1000)
    p.add_argument("--eps-abs", type=float, default=1e-7)
    p.add_argument("--eps-rel", type=float, default=1e-5)
    p.add_argument("--no-adaptive-rho", action="store_true")
    p.add_argument("--scale-correlation", action="store_true")


def _add_problem_flags(p):
    p.add_argument("--family", required=True, choices=[f.value for f in Family])
    p.add_argument("--input", required=True, type=_paths, help="comma-separated covariance CSV files")
    p.add_argument("-N", "--samples", required=True, type=_ints, help="comma-separated sample counts")
    p.add_argument("--latent", action="store_true")
    p.add_argument("--out", default=".")


def build_parser():
    parser = _Parser(prog="gglopt", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"gglopt {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("solve", help="solve at fixed regularization parameters")
    _add_problem_flags(p)
    p.add_argument("--lambda1", type=float, required=True)
    p.add_argument("--lambda2", type=float)
    p.add_argument("--mu1", type=_floats)
    p.add_argument("--solver", choices=["auto", "admm", "block"], default="auto",
                   help="auto uses the block solver for non-latent SGL")
    _add_solver_flags(p)

    p = sub.add_parser("select", help="grid search with the extended BIC")
    _add_problem_flags(p)
    p.add_argument("--lambda1-grid", type=_floats)
    p.add_argument("--lambda2-grid", type=_floats)
    p.add_argument("--mu1-grid", type=_floats)
    p.add_argument("--grid-size", type=int, default=10)
    p.add_argument("--gamma", type=float, default=0.5)
    _add_solver_flags(p)

    p = sub.add_parser("generate", help="write a synthetic ground truth and empirical covariance")
    p.add_argument("-p", "--dim", type=int, required=True)
    p.add_argument("-N", "--samples", type=int, required=True)
    p.add_argument("--edge-prob", type=float, default=0.1)
    p.add_argument("--weight-min", type=float, default=0.2)
    p.add_argument("--weight-max", type=float, default=0.5)
    p.add_argument("--latent-confounders", type=int, default=0)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", default=".")

    p = sub.add_parser("benchmark", help="full vs block-wise ADMM on fragmented SGL instances")
    p.add_argument("--p", dest="dims", type=_ints, default=[200, 500])
    p.add_argument("--lambda1", default="auto",
                   help="comma-separated values, or 'auto' for the smallest lambda1 leaving no component above p/10")
    p.add_argument("-N", "--samples", type=int, default=2000)
    p.add_argument("--block-size", type=int, default=10)
    p.add_argument("--edge-prob", type=float, default=0.3)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", help="write the table as CSV here (plus manifest.json next to it)")
    return parser


def _config(args):
    return SolverConfig(rho_init=args.rho, max_iter=args.max_iter, eps_abs=args.eps_abs, eps_rel=args.eps_rel,
                        adaptive_rho=not args.no_adaptive_rho, scale_to_correlation=args.scale_correlation)


def _load_cov(args):
    if len(args.input) != len(args.samples):
        raise ValidationError([f"samples: {len(args.input)} input files but {len(args.samples)} sample counts"])
    mats = []
    for path in args.input:
        try:
            mats.append(read_matrix(path))
        except (OSError, ValueError) as exc:
            raise ValidationError([f"input: cannot read {path}: {exc}"]) from None
    return CovInput(mats, args.samples).check()


def _diag_dict(d):
    out = asdict(d)
    return {k: (None if isinstance(v, float) and not np.isfinite(v) else v) for k, v in out.items()}


def _write_solution(out, sol, latent):
    files = []
    for k, (T, L) in enumerate(zip(sol.theta, sol.lowrank)):
        path = os.path.join(out, f"theta_{k}.csv")
        write_matrix(path, T)
        files.append(path)
        if latent:
            path = os.path.join(out, f"lowrank_{k}.csv")
            write_matrix(path, L)
            files.append(path)
        path = os.path.join(out, f"edges_{k}.tsv")
        write_edges(path, T)
        files.append(path)
    return files


def _manifest(args, argv, inputs, outputs, diagnostics, **extra):
    params = {k: v for k, v in vars(args).items() if k not in ("command", "verbose")}
    m = {
        "command": args.command,
        "argv": list(argv),
        "parameters": params,
        "inputs": {p: sha256_file(p) for p in inputs},
        "outputs": [os.path.basename(p) for p in outputs],
        "diagnostics": diagnostics,
        "tool_version": __version__,
    }
    m.update(extra)
    return m


def cmd_solve(args, argv):
    family = Family(args.family)
    if args.lambda2 is not None and family is Family.SGL:
        raise ValidationError(["flags: --lambda2 is not valid with --family sgl"])
    if args.mu1 is not None and not args.latent:
        raise ValidationError(["flags: --mu1 requires --latent"])
    if args.latent and args.mu1 is None:
        raise ValidationError(["flags: --latent requires --mu1"])
    if args.solver == "block" and (family is not Family.SGL or args.latent):
        raise ValidationError(["flags: --solver block only applies to non-latent SGL"])
    cov = _load_cov(args)
    pen = PenaltySpec(family, args.lambda1, args.lambda2 or 0.0, latent=args.latent, mu1=args.mu1 or ())
    pen.check_against(cov)
    cfg = _config(args)

    use_block = family is Family.SGL and not args.latent and args.solver != "admm" and not cfg.scale_to_correlation
    if use_block:
        sol = solve_sgl_blockwise(cov.matrices[0], cov.sample_counts[0], args.lambda1, cfg)
    else:
        sol = solve(cov, pen, cfg)

    outputs = _write_solution(args.out, sol, args.latent)
    mpath = os.path.join(args.out, "manifest.json")
    write_json(mpath, _manifest(args, argv, args.input, outputs, _diag_dict(sol.diagnostics),
                                solver="block" if use_block else "admm"))
    return EXIT_OK if sol.diagnostics.converged else EXIT_NOT_CONVERGED


def cmd_select(args, argv):
    family = Family(args.family)
    if args.lambda2_grid is not None and family is Family.SGL:
        raise ValidationError(["flags: --lambda2-grid is not valid with --family sgl"])
    if args.mu1_grid is not None and not args.latent:
        raise ValidationError(["flags: --mu1-grid requires --latent"])
    cov = _load_cov(args)
    if family is Family.SGL and cov.K != 1:
        raise ValidationError(["flags: --family sgl takes exactly one input"])
    if args.grid_size < 2:
        raise ValidationError(["flags: --grid-size must be >= 2"])

    l1 = args.lambda1_grid
    if l1 is None:
        l1 = default_lambda_grid(cov, args.grid_size)
    l1 = sorted(set(l1), reverse=True)
    l2 = ()
    if family is not Family.SGL:
        l2 = args.lambda2_grid if args.lambda2_grid is not None else list(0.1 * default_lambda_grid(cov, 3))
    mu = ()
    if args.latent:
        mu = args.mu1_grid if args.mu1_grid is not None else [1.0, 0.1, 0.01]
    grid = ParameterGrid(l1, l2, mu, gamma=args.gamma)
    cfg = _config(args)

    report_path = os.path.join(args.out, "report.json")
    try:
        report = grid_search(cov, family, grid, cfg)
    except SelectionError as exc:
        write_json(report_path, exc.report.to_dict())
        write_json(os.path.join(args.out, "manifest.json"),
                   _manifest(args, argv, args.input, [report_path], None, gamma=args.gamma, chosen=None))
        logger.error("%s", exc)
        return EXIT_NOT_CONVERGED

    write_json(report_path, report.to_dict())
    outputs = [report_path] + _write_solution(args.out, report.solution, args.latent)
    best = report.best_entry
    chosen = {"lambda1": best.lambda1, "lambda2": best.lambda2 if family is not Family.SGL else None,
              "mu1": best.mu1, "ebic": best.ebic, "index": report.best}
    write_json(os.path.join(args.out, "manifest.json"),
               _manifest(args, argv, args.input, outputs, _diag_dict(report.solution.diagnostics),
                         gamma=args.gamma, chosen=chosen))
    return EXIT_OK


def cmd_generate(args, argv):
    if args.dim < 2 or args.samples < 2:
        raise ValidationError(["flags: -p and -N must be >= 2"])
    if not 0.0 <= args.edge_prob <= 1.0:
        raise ValidationError(["flags: --edge-prob must lie in [0, 1]"])
    if not 0 < args.weight_min <= args.weight_max:
        raise ValidationError(["flags: need 0 < --weight-min <= --weight-max"])
    if args.latent_confounders < 0:
        raise ValidationError(["flags: --latent-confounders must be >= 0"])
    wr = (args.weight_min, args.weight_max)
    if args.latent_confounders:
        truth = generate_latent_precision(args.dim, args.latent_confounders, args.edge_prob, wr, seed=args.seed)
        sparse = truth.sparse
    else:
        truth = generate_precision(args.dim, args.edge_prob, wr, seed=args.seed)
        sparse = truth.precision
    S = sample_covariance(truth, args.samples, seed=(args.seed, 1))

    out = args.out
    files = [os.path.join(out, n) for n in ("precision.csv", "covariance.csv", "S.csv", "edges.tsv")]
    write_matrix(files[0], sparse)
    write_matrix(files[1], truth.covariance)
    write_matrix(files[2], S)
    write_edges(files[3], sparse, tol=1e-10)
    if args.latent_confounders:
        files.append(os.path.join(out, "lowrank.csv"))
        write_matrix(files[-1], truth.lowrank)
    write_json(os.path.join(out, "manifest.json"),
               _manifest(args, argv, [], files, None, rng=RNG_NAME, seed=args.seed,
                         edge_count=len(truth.edges)))
    return EXIT_OK


BENCH_TOLERANCES = {"low": (1e-4, 1e-3), "high": (1e-7, 1e-5)}
BENCH_COLUMNS = ["p", "lambda1", "tolerance", "components", "largest_component", "time_full", "time_block",
                 "speedup", "kkt_full", "kkt_block", "converged_full", "converged_block"]


def run_benchmark(dims, lambdas, samples, block_size, edge_prob, seed):
    """Rows of the full-vs-block comparison; ``lambdas`` is a list or ``"auto"``."""
    rows = []
    for p in dims:
        truth = generate_block_precision(p, block_size, edge_prob, seed=seed)
        S = sample_covariance(truth, samples, seed=(seed, 1))
        cov = CovInput([S], [samples])
        lam_list = [fragmenting_lambda(S, max(1, p // 10))] if lambdas == "auto" else lambdas
        for lam in lam_list:
            part = connected_components(threshold_graph(S, lam))
            pen = PenaltySpec(Family.SGL, lam)
            for name, (ea, er) in BENCH_TOLERANCES.items():
                cfg = replace(SolverConfig(), eps_abs=ea, eps_rel=er, max_iter=5000)
                t0 = time.perf_counter()
                full = solve(cov, pen, cfg)
                t1 = time.perf_counter()
                block = solve_sgl_blockwise(S, samples, lam, cfg)
                t2 = time.perf_counter()
                rows.append({
                    "p": p, "lambda1": lam, "tolerance": name,
                    "components": part.component_count,
                    "largest_component": int(part.component_sizes.max()),
                    "time_full": t1 - t0, "time_block": t2 - t1,
                    "speedup": (t1 - t0) / max(t2 - t1, 1e-12),
                    "kkt_full": kkt_residual(cov, pen, full),
                    "kkt_block": kkt_residual(cov, pen, block),
                    "converged_full": full.diagnostics.converged,
                    "converged_block": block.diagnostics.converged,
                })
    return rows


def _format_table(rows):
    lines = [",".join(BENCH_COLUMNS)]
    for r in rows:
        lines.append(",".join(repr(r[c]) if isinstance(r[c], float) else str(r[c]) for c in BENCH_COLUMNS))
    return "\n".join(lines) + "\n"


def cmd_benchmark(args, argv):
    if not args.dims or min(args.dims) < 2:
        raise ValidationError(["flags: --p values must be >= 2"])
    if args.block_size < 1 or args.samples < 2 or not 0.0 <= args.edge_prob <= 1.0:
        raise ValidationError(["flags: invalid sweep parameters"])
    if args.lambda1 == "auto":
        lambdas = "auto"
    else:
        try:
            lambdas = _floats(args.lambda1)
        except argparse.ArgumentTypeError as exc:
            raise ValidationError([str(exc)]) from None
        if not lambdas or min(lambdas) < 0:
            raise ValidationError(["flags: --lambda1 values must be >= 0"])
    rows = run_benchmark(args.dims, lambdas, args.samples, args.block_size, args.edge_prob, args.seed)
    table = _format_table(rows)
    sys.stdout.write(table)
    if args.out:
        write_text(args.out, table)
        write_json(os.path.join(os.path.dirname(os.path.abspath(args.out)), "manifest.json"),
                   _manifest(args, argv, [], [args.out], None, rng=RNG_NAME, seed=args.seed))
    return EXIT_OK


COMMANDS = {"solve": cmd_solve, "select": cmd_select, "generate": cmd_generate, "benchmark": cmd_benchmark}


def main(argv=None):
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"gglopt: error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args, argv)
    except ValidationError as exc:
        print(f"gglopt: invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except Exception:
        logger.exception("internal error")
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
