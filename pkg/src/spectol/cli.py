"""Command line front end.

Subcommands: sample, embed, sweep, cluster-stability, check.  Exit code 0 on
success, 2 for usage errors (argparse's convention), 1 for runtime failures
with a one-line diagnostic on stderr.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .errors import SpectolError
from .experiments import (
    DEFAULT_TOLERANCES,
    ingest_edge_list,
    load_sweep_config,
    parse_tolerances,
    run_clustering_stability,
    run_tolerance_sweep,
    sweep_config_from_dict,
    write_edge_list,
    write_records_csv,
    _parse_block_matrix,
    _pilot_dimension,
)
from .graph_model import (
    FactoredProbabilityMatrix,
    SbmSpec,
    check_assumptions,
    eigengap_ratio,
    sample_adjacency,
    sbm_to_latent,
)
from .spectral_core import truncated_eigs
from .tolerance import tolerance_report


def _add_sbm_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--sizes", help="comma-separated block sizes, e.g. 300,300,300"
    )
    parser.add_argument("--b-diag", type=float, help="within-block edge probability")
    parser.add_argument(
        "--b-off", type=float, default=0.0, help="between-block edge probability"
    )
    parser.add_argument(
        "--b", help="full block matrix, rows separated by ';', e.g. 0.05,0.02;0.02,0.05"
    )


def _sbm_from_args(args) -> SbmSpec:
    if not args.sizes:
        raise SpectolError("an SBM needs --sizes")
    sizes = tuple(int(s) for s in args.sizes.split(",") if s.strip())
    if args.b:
        B = _parse_block_matrix(args.b)
    elif args.b_diag is not None:
        k = len(sizes)
        B = np.full((k, k), args.b_off) + np.eye(k) * (args.b_diag - args.b_off)
    else:
        raise SpectolError("an SBM needs --b or --b-diag")
    return SbmSpec(block_probabilities=B, sizes=sizes)


def _resolve_dim(args, graph) -> int:
    if args.dim == "auto":
        return _pilot_dimension(graph, args.seed)
    return int(args.dim)


def _cmd_sample(args) -> int:
    spec = _sbm_from_args(args)
    P = FactoredProbabilityMatrix(sbm_to_latent(spec))
    graph = sample_adjacency(P, args.seed)
    write_edge_list(
        args.out, graph, header={"n": graph.n, "m": graph.m, "seed": args.seed}
    )
    print(f"wrote {graph.m} edges on {graph.n} vertices to {args.out}")
    return 0


def _cmd_embed(args) -> int:
    graph = ingest_edge_list(args.graph).graph
    d = _resolve_dim(args, graph)
    if args.tol is not None:
        tol = args.tol
    else:
        report = tolerance_report(graph, seed=args.seed)
        tol = {
            "spectral": report.heuristic_spectral,
            "sqrt_n": report.heuristic_sqrt_n,
            "conservative": report.conservative,
        }[args.tol_heuristic]
    dec = truncated_eigs(graph, d, tol, seed=args.seed)
    values_path = Path(str(args.out) + ".values.csv")
    vectors_path = Path(str(args.out) + ".vectors.csv")
    values_path.write_text(
        "".join(format(v, ".17g") + "\n" for v in dec.values), encoding="utf-8"
    )
    with open(vectors_path, "w", encoding="utf-8") as fh:
        for row in dec.vectors:
            fh.write(",".join(format(v, ".17g") for v in row) + "\n")
    status = "converged" if dec.converged else "NOT converged"
    print(
        f"{status}: d={d} tol={tol:.6g} iterations={dec.iterations} "
        f"matvecs={dec.matvecs} residual={dec.residual:.6g}"
    )
    print(f"values -> {values_path}")
    print(f"vectors -> {vectors_path}")
    return 0 if dec.converged else 1


def _cmd_sweep(args) -> int:
    if args.config:
        config = load_sweep_config(args.config)
    else:
        data: dict = {}
        if args.graph:
            data["edge_list"] = args.graph
        else:
            if not args.sizes:
                raise SpectolError("sweep needs --config, --graph, or SBM flags")
            data["sizes"] = args.sizes
            if args.b:
                data["b"] = args.b
            elif args.b_diag is not None:
                data["b_diag"] = args.b_diag
                data["b_off"] = args.b_off
            else:
                raise SpectolError("an SBM needs --b or --b-diag")
        data["d"] = args.dim
        if args.tolerances:
            data["tolerances"] = args.tolerances
        data["replicates"] = args.replicates
        data["seed"] = args.seed
        data["heuristic_variant"] = args.variant
        data["workers"] = args.workers
        data["scaled"] = args.scaled
        data["record_timing"] = args.timing
        if args.out:
            data["output"] = args.out
        config = sweep_config_from_dict(data)
    records, summary = run_tolerance_sweep(config)
    if config.output:
        print(f"records -> {config.output}")
        print(f"summary -> {Path(config.output).with_suffix('.summary.json')}")
    else:
        print(json.dumps(summary, indent=2))
    return 0


def _cmd_cluster_stability(args) -> int:
    if args.graph:
        graph = ingest_edge_list(args.graph).graph
    else:
        spec = _sbm_from_args(args)
        P = FactoredProbabilityMatrix(sbm_to_latent(spec))
        graph = sample_adjacency(P, args.seed)
    d = _resolve_dim(args, graph)
    tolerances = (
        parse_tolerances(args.tolerances) if args.tolerances else DEFAULT_TOLERANCES
    )
    k_range = tuple(int(k) for k in args.k_range.split(",") if k.strip())
    records, summary = run_clustering_stability(
        graph,
        d,
        tolerances,
        reference_tol=args.reference_tol,
        seed=args.seed,
        repetitions=args.repetitions,
        k_range=k_range,
    )
    if args.out:
        write_records_csv(args.out, records)
        summary_path = Path(args.out).with_suffix(".summary.json")
        summary_path.write_text(json.dumps(summary, indent=2) + "\n", encoding="utf-8")
        print(f"records -> {args.out}")
        print(f"summary -> {summary_path}")
    else:
        print(json.dumps(summary, indent=2))
    return 0


def _cmd_check(args) -> int:
    spec = _sbm_from_args(args)
    P = FactoredProbabilityMatrix(sbm_to_latent(spec))
    d = spec.k if args.dim == "auto" else int(args.dim)
    graph = sample_adjacency(P, args.seed)
    report = tolerance_report(graph, seed=args.seed)
    assumptions = check_assumptions(P, d, args.c0, args.a)
    payload = {
        "n": graph.n,
        "m": graph.m,
        "delta_A": report.delta_A,
        "lambda1_hat": report.spectral_norm_estimate,
        "gamma": eigengap_ratio(P, d),
        "heuristic_spectral": report.heuristic_spectral,
        "heuristic_sqrt_n": report.heuristic_sqrt_n,
        "conservative": report.conservative,
        "rank_check": assumptions.rank_matches,
        "gamma_check": assumptions.gamma_check,
        "delta_check": assumptions.delta_check,
    }
    text = json.dumps(payload, indent=2)
    if args.out:
        Path(args.out).write_text(text + "\n", encoding="utf-8")
        print(f"report -> {args.out}")
    else:
        print(text)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spectol",
        description="Truncated spectral decomposition of sparse graphs "
        "with noise-calibrated stopping tolerances.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sample", help="sample an SBM graph to an edge-list file")
    _add_sbm_arguments(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="edge-list output path")
    p.set_defaults(func=_cmd_sample)

    p = sub.add_parser("embed", help="embed a graph from an edge-list file")
    p.add_argument("--graph", required=True, help="edge-list input path")
    p.add_argument("--dim", default="auto", help="embedding dimension or 'auto'")
    p.add_argument("--tol", type=float, help="explicit stopping tolerance")
    p.add_argument(
        "--tol-heuristic",
        choices=("spectral", "sqrt_n", "conservative"),
        default="spectral",
        help="tolerance rule used when --tol is absent",
    )
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output prefix for values/vectors")
    p.set_defaults(func=_cmd_embed)

    p = sub.add_parser("sweep", help="paired tolerance sweep")
    p.add_argument("--config", help="JSON or key=value config file")
    _add_sbm_arguments(p)
    p.add_argument("--graph", help="edge-list input path (instead of SBM flags)")
    p.add_argument("--dim", default="auto")
    p.add_argument("--tolerances", help="e.g. 2^-1..2^-20 or 0.5,0.25,1e-6")
    p.add_argument("--replicates", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--variant", choices=("spectral", "sqrt_n"), default="spectral")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--scaled", action="store_true", help="also compare scaled embeddings")
    p.add_argument("--timing", action="store_true", help="record wall-clock times")
    p.add_argument("--out", help="CSV output path")
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("cluster-stability", help="embed-then-cluster stability study")
    _add_sbm_arguments(p)
    p.add_argument("--graph", help="edge-list input path (instead of SBM flags)")
    p.add_argument("--dim", default="auto")
    p.add_argument("--tolerances", help="e.g. 2^-1..2^-14")
    p.add_argument("--reference-tol", type=float, default=1e-6)
    p.add_argument("--repetitions", type=int, default=10)
    p.add_argument("--k-range", default="2,3,4,5,6")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="CSV output path")
    p.set_defaults(func=_cmd_cluster_stability)

    p = sub.add_parser("check", help="tolerance report and model assumption checks")
    _add_sbm_arguments(p)
    p.add_argument("--dim", default="auto", help="embedding dimension (default: block count)")
    p.add_argument("--c0", type=float, default=0.1, help="gap ratio threshold")
    p.add_argument("--a", type=float, default=0.5, help="density exponent margin")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="JSON output path (default: stdout)")
    p.set_defaults(func=_cmd_check)

    return parser


def cli_main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exit_:
        return int(exit_.code or 0)
    try:
        return args.func(args)
    except (SpectolError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    raise SystemExit(cli_main())
