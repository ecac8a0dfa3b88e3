"""Command-line surface: gen, solve, sweep, and eval subcommands.

Exit codes: 0 success, 2 iteration cap hit, 1 usage or IO error.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import io
from .admm import AdmmParams, solve_l1
from .dca import DcaParams, solve_mcp
from .graphs import (
    EdgeGraph,
    GraphError,
    gen_erdos_renyi,
    gen_grid,
    gen_modular,
    generate_connected,
    perturb_connectivity,
    population_covariance,
    sample_covariance,
    sample_weights,
    true_prior,
)
from .metrics import detected_edges, f1_score, recovery_error
from .penalty import PenaltyParams
from .problem import ProblemData
from .sweep import SweepConfig, run_sweep

__all__ = ["main"]


def _parse_lambda_grid(spec):
    """Log-spaced grid from a lo:hi:count specification."""
    parts = spec.split(":")
    if len(parts) != 3:
        raise ValueError("lambda grid must be lo:hi:count")
    lo, hi, count = float(parts[0]), float(parts[1]), int(parts[2])
    if lo <= 0 or hi <= 0 or count < 1:
        raise ValueError("lambda grid requires positive endpoints and count >= 1")
    if count == 1:
        return [lo]
    return list(np.logspace(np.log10(lo), np.log10(hi), count))


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="laplace-mcp",
        description="Learn sparse combinatorial graph Laplacians from covariance data.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="generate a synthetic weighted graph (and covariance)")
    gen.add_argument("--ensemble", choices=["er", "grid", "modular"], required=True)
    gen.add_argument("--nodes", type=int, required=True)
    gen.add_argument("--prob", type=float, default=0.1, help="edge probability (er)")
    gen.add_argument("--p1", type=float, default=0.005, help="cross-module probability")
    gen.add_argument("--p2", type=float, default=0.25, help="within-module probability")
    gen.add_argument("--modules", type=int, default=4)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--weights", type=float, nargs=2, default=(0.1, 3.0), metavar=("LO", "HI"))
    gen.add_argument("--out", required=True, help="graph JSON output path")
    gen.add_argument("--cov", help="also write a covariance Matrix Market file")
    gen.add_argument(
        "--samples",
        type=int,
        help="sample size for the covariance; omit to write the exact pseudo-inverse",
    )

    solve = sub.add_parser("solve", help="solve one model instance from files")
    solve.add_argument("--model", choices=["cgl-mcp", "cgl-l1"], required=True)
    cov_src = solve.add_mutually_exclusive_group(required=True)
    cov_src.add_argument("--cov", help="covariance Matrix Market file")
    cov_src.add_argument(
        "--data",
        help="raw data CSV (k rows x n columns, header optional); columns are "
        "mean-centered and the covariance is (1/k) X^T X",
    )
    solve.add_argument(
        "--connectivity",
        default="full",
        help="'full' or a graph JSON file with the candidate edges",
    )
    solve.add_argument("--lambda", dest="lam", type=float, required=True)
    solve.add_argument("--gamma", type=float, default=1.5)
    solve.add_argument("--eps", type=float, default=1e-6)
    solve.add_argument("--sigma0", type=float, default=1.0)
    solve.add_argument("--max-outer", type=int, default=500)
    solve.add_argument("--max-iter", type=int, default=20000, help="ADMM iteration cap")
    solve.add_argument(
        "--gram-strategy",
        choices=["auto", "cholesky", "smw", "cg"],
        default="auto",
        help="solver for the (3I + |B|^T|B|) linear system",
    )
    solve.add_argument("--out", help="report JSON output path")

    sweep = sub.add_parser("sweep", help="lambda/seed benchmark sweep on synthetic graphs")
    sweep.add_argument("--model", choices=["cgl-mcp", "cgl-l1"], default="cgl-mcp")
    sweep.add_argument("--ensemble", choices=["er", "grid", "modular"], default="er")
    sweep.add_argument("--nodes", type=int, default=100)
    sweep.add_argument("--prob", type=float, default=0.1)
    sweep.add_argument("--p1", type=float, default=0.005)
    sweep.add_argument("--p2", type=float, default=0.25)
    sweep.add_argument("--modules", type=int, default=4)
    sweep.add_argument("--truth", help="fixed truth graph JSON instead of an ensemble")
    sweep.add_argument(
        "--scenario", choices=["true", "coarse", "full", "drop"], default="true"
    )
    sweep.add_argument("--coarse-factor", type=float, default=1.5)
    sweep.add_argument("--drop-percent", type=float, default=10.0)
    sweep.add_argument("--lambdas", default="1e-4:1:10", help="log grid lo:hi:count")
    sweep.add_argument("--seeds", type=int, default=5, help="number of seeds (0..N-1)")
    sweep.add_argument("--samples-per-node", type=int, default=5000)
    sweep.add_argument("--exact-cov", action="store_true")
    sweep.add_argument("--gamma", type=float, default=1.5)
    sweep.add_argument("--eps", type=float, default=1e-6)
    sweep.add_argument("--weights", type=float, nargs=2, default=(0.1, 3.0))
    sweep.add_argument("--threads", type=int)
    sweep.add_argument("--out", required=True, help="CSV output path")

    ev = sub.add_parser("eval", help="score a report against a truth graph")
    ev.add_argument("--report", required=True)
    ev.add_argument("--truth", required=True)
    ev.add_argument("--threshold-rel", type=float, default=1e-4)
    ev.add_argument("--out", help="metrics JSON output path (default: stdout)")
    return parser


def _cmd_gen(args):
    if args.ensemble == "er":
        factory = lambda s: gen_erdos_renyi(args.nodes, args.prob, s)
    elif args.ensemble == "grid":
        factory = lambda s: gen_grid(args.nodes, s)
    else:
        factory = lambda s: gen_modular(args.nodes, args.p1, args.p2, s, args.modules)
    g = generate_connected(factory, args.seed)
    g = sample_weights(g, args.weights[0], args.weights[1], args.seed + 7919)
    io.save_graph(args.out, g)
    print(f"wrote {args.out}: n={g.n}, edges={g.m}")
    if args.cov:
        L = g.laplacian()
        if args.samples:
            S = sample_covariance(L, args.samples, args.seed + 104729)
        else:
            S = population_covariance(L)
        io.write_covariance(args.cov, S)
        kind = f"sampled k={args.samples}" if args.samples else "exact pseudo-inverse"
        print(f"wrote {args.cov} ({kind})")
    return 0


def _resolve_prior(spec, n):
    if spec == "full":
        g = EdgeGraph(n, np.column_stack(np.triu_indices(n, 1)))
        return true_prior(g).graph, "full"
    g = io.load_graph(spec).unweighted()
    if g.n != n:
        raise ValueError(
            f"connectivity file has {g.n} nodes but the covariance has {n}"
        )
    return g, "file"


def _cmd_solve(args):
    if args.cov:
        S = io.read_covariance(args.cov)
    else:
        S = io.covariance_from_data(io.read_data_matrix(args.data))
    n = S.shape[0]
    prior, tag = _resolve_prior(args.connectivity, n)
    if args.model == "cgl-l1" and args.lam <= 0:
        raise ValueError("the cgl-l1 model requires lambda > 0")
    if args.lam < 0:
        raise ValueError("lambda must be non-negative")
    problem = ProblemData(
        S, prior, PenaltyParams(args.lam, args.gamma), gram_strategy=args.gram_strategy
    )
    if args.model == "cgl-mcp":
        report = solve_mcp(
            problem,
            DcaParams(eps=args.eps, sigma0=args.sigma0, max_outer=args.max_outer),
        )
    else:
        report = solve_l1(problem, AdmmParams(eps=args.eps, max_iter=args.max_iter))
    report.config.update(
        {
            "cov": args.cov,
            "data": args.data,
            "connectivity": args.connectivity,
            "connectivity_kind": tag,
            "gram_strategy": args.gram_strategy,
            "out": args.out,
        }
    )
    if args.out:
        io.save_report(args.out, report)
    print(
        f"{args.model}: termination={report.termination}, "
        f"objective={report.objective:.6e}, time={report.wall_time_s:.2f}s"
    )
    return 0 if report.converged else 2


def _cmd_sweep(args):
    cfg = SweepConfig(
        model=args.model,
        ensemble=args.ensemble,
        n=args.nodes,
        prob=args.prob,
        p1=args.p1,
        p2=args.p2,
        modules=args.modules,
        truth_file=args.truth,
        scenario=args.scenario,
        coarse_factor=args.coarse_factor,
        drop_percent=args.drop_percent,
        lambdas=_parse_lambda_grid(args.lambdas),
        seeds=list(range(args.seeds)),
        samples_per_node=args.samples_per_node,
        exact_cov=args.exact_cov,
        gamma=args.gamma,
        eps=args.eps,
        weight_lo=args.weights[0],
        weight_hi=args.weights[1],
        threads=args.threads,
    )
    records, averages = run_sweep(cfg)
    io.write_sweep_csv(args.out, [r.row() for r in records])
    stem = args.out[:-4] if args.out.endswith(".csv") else args.out
    avg_path = stem + "_avg.csv"
    io.write_sweep_csv(avg_path, [r.row() for r in averages])
    cfg_path = stem + "_config.json"
    with open(cfg_path, "w", encoding="utf-8") as fh:
        json.dump(cfg.to_dict(), fh, indent=1)
        fh.write("\n")
    print(f"wrote {len(records)} rows to {args.out}, averages to {avg_path}")
    capped = sum(1 for r in records if r.status != "converged")
    if capped:
        print(f"{capped} cells did not converge", file=sys.stderr)
        return 2
    return 0


def _cmd_eval(args):
    report = io.load_report(args.report)
    truth = io.load_graph(args.truth)
    if truth.n != report.n:
        raise ValueError(
            f"truth has {truth.n} nodes but the report has {report.n}"
        )
    est = detected_edges(report.w, report.edges, args.threshold_rel)
    metrics = {
        "f1": f1_score(est, truth.edges),
        "estimated_edges": int(est.shape[0]),
        "true_edges": int(truth.m),
    }
    if truth.weights is not None:
        metrics["recovery_error"] = recovery_error(report.theta(), truth.laplacian())
    payload = json.dumps(metrics, indent=1)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(payload + "\n")
    else:
        print(payload)
    return 0


def main(argv=None):
    parser = _build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "gen": _cmd_gen,
        "solve": _cmd_solve,
        "sweep": _cmd_sweep,
        "eval": _cmd_eval,
    }
    try:
        return handlers[args.command](args)
    except (OSError, ValueError, GraphError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
