"""Command-line entry point.

Subcommands: partition, metrics, gen-rmat, oracle-rf, oracle-welfare,
compare. Exit status 0 on success, 1 on usage errors, 2 on runtime errors.
The S5P_LOG environment variable (error, info, debug) controls logging.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

import numpy as np

from . import report as rpt
from .cluster_graph import SketchConfig, build_cluster_graph
from .clustering import ClusteringConfig, cluster_stream
from .game import GameConfig, init_game, run_game, social_welfare
from .graph_io import FormatError, compute_degrees, open_edge_stream
from .metrics import degree_resolved_rf, poa_bound, quality_report, report_dict, skewness
from .pipeline import RunConfig, run_partition, write_metrics_json
from .postprocess import read_partition_binary, read_partition_text, result_from_assignment
from .reference import oracle_optimal_rf, oracle_optimal_welfare
from .synth import RmatConfig, gen_rmat

log = logging.getLogger("s5p.cli")


class _Parser(argparse.ArgumentParser):
    # Usage problems exit 1 (argparse default would be 2, which is reserved
    # for runtime failures here).
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _setup_logging() -> None:
    level_name = os.environ.get("S5P_LOG", "error").lower()
    level = {"error": logging.ERROR, "info": logging.INFO,
             "debug": logging.DEBUG}.get(level_name, logging.ERROR)
    logging.basicConfig(level=level, stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")


def _add_run_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--k", type=int, default=4, help="number of partitions")
    p.add_argument("--tau", type=float, default=1.0, help="imbalance threshold")
    p.add_argument("--beta", type=float, default=1.0, help="degree threshold coefficient")
    p.add_argument("--epsilon", type=float, default=0.1, help="sketch additive error fraction")
    p.add_argument("--nu", type=float, default=0.01, help="sketch failure probability")
    p.add_argument("--batch-size", type=int, default=256, help="clusters per game batch")
    p.add_argument("--threads", type=int, default=16, help="game worker threads")
    p.add_argument("--max-rounds", type=int, default=50, help="game round cap")
    p.add_argument("--seed", type=int, default=0, help="master seed")
    p.add_argument("--deterministic", action="store_true",
                   help="sequential single-threaded game (reference behavior)")
    p.add_argument("--theta", choices=("sketch", "exact"), default="sketch",
                   help="inter-cluster count backend")
    p.add_argument("--input-format", choices=("auto", "text", "binary"), default="auto")


def _run_config(args, algorithm: str, output: str | None) -> RunConfig:
    return RunConfig(
        input=args.input,
        algorithm=algorithm,
        k=args.k,
        tau=args.tau,
        beta=args.beta,
        epsilon=args.epsilon,
        nu=args.nu,
        batch_size=args.batch_size,
        threads=args.threads,
        max_rounds=args.max_rounds,
        seed=args.seed,
        output=output,
        output_format=getattr(args, "format", "text"),
        input_format=args.input_format,
        deterministic=args.deterministic,
        theta_mode=args.theta,
        track_memory=getattr(args, "track_memory", False),
        dump_clusters=getattr(args, "dump_clusters", False),
        dump_cluster_graph=getattr(args, "dump_cluster_graph", False),
    )


def cmd_partition(args) -> int:
    output = args.output or args.input + ".parts"
    cfg = _run_config(args, args.algorithm, output)
    run = run_partition(cfg)
    write_metrics_json(run, output + ".metrics.json")
    print(json.dumps(run.metrics_json()))
    return 0


def cmd_metrics(args) -> int:
    stream = open_edge_stream(args.edges, "auto")
    degrees = compute_degrees(stream)
    with open(args.partition, "rb") as f:
        is_binary = f.read(4) == b"S5PP"
    if is_binary:
        ps = read_partition_binary(args.partition)
    else:
        us, vs, ps = read_partition_text(args.partition)
        if len(ps) != stream.edge_count:
            raise ValueError(
                f"partition file covers {len(ps)} edges, edge file has {stream.edge_count}")
        offset = 0
        for block in stream.blocks():
            n = len(block)
            if not (np.array_equal(block[:, 0].astype(np.int64), us[offset:offset + n])
                    and np.array_equal(block[:, 1].astype(np.int64), vs[offset:offset + n])):
                raise ValueError("partition file endpoints disagree with edge file")
            offset += n
    k = int(ps.max()) + 1 if len(ps) else 1
    result = result_from_assignment(stream, ps, k)
    report = quality_report(result)
    skew = skewness(degrees, stream.vertex_count, stream.edge_count)
    payload = report_dict(report, skew, bounds={"poa_bound": poa_bound(k)})
    text = json.dumps(payload, indent=2)
    if args.out:
        with open(args.out, "wt", encoding="ascii") as f:
            f.write(text + "\n")
    print(text)
    if args.figures:
        os.makedirs(args.figures, exist_ok=True)
        dr = degree_resolved_rf(result, degrees)
        rpt.write_degree_table(dr, os.path.join(args.figures, "degree_rf.tsv"))
        rpt.fig_degree_rf({"partition": dr}, os.path.join(args.figures, "degree_rf.png"))
        rpt.fig_loads({"partition": result.load.tolist()},
                      os.path.join(args.figures, "loads.png"))
    return 0


def cmd_gen_rmat(args) -> int:
    cfg = RmatConfig(scale=args.scale, edge_count=args.edges,
                     a=args.a, b=args.b, c=args.c, d=args.d,
                     seed=args.seed, simple=args.simple)
    summary = gen_rmat(cfg, args.out)
    print(json.dumps({
        "vertices_touched": summary.vertex_count,
        "edges": summary.edge_count,
        "seed": summary.seed,
        "out": summary.out_path,
    }))
    return 0


def cmd_oracle_rf(args) -> int:
    stream = open_edge_stream(args.input, "auto")
    edges = list(stream.edges())
    res = oracle_optimal_rf(edges, args.k)
    print(json.dumps({
        "opt_rf": res.opt_value,
        "assignment": res.arg.tolist(),
        "space": res.space,
    }))
    return 0


def cmd_oracle_welfare(args) -> int:
    stream = open_edge_stream(args.input, "auto")
    degrees = compute_degrees(stream)
    ccfg = ClusteringConfig.for_stream(stream, args.k, beta=args.beta)
    state = cluster_stream(stream, degrees, ccfg)
    graph = build_cluster_graph(stream, state, degrees,
                                SketchConfig(epsilon=args.epsilon, nu=args.nu, seed=args.seed),
                                exact=args.theta == "exact")
    gcfg = GameConfig(k=args.k, max_rounds=args.max_rounds, batch_size=args.batch_size,
                      threads=args.threads, deterministic=args.deterministic)
    game = run_game(init_game(graph, gcfg), gcfg)
    res = oracle_optimal_welfare(graph, args.k)
    eq_welfare = social_welfare(game)
    res.with_ratio(eq_welfare)
    print(json.dumps({
        "opt_welfare": res.opt_value,
        "game_welfare": eq_welfare,
        "ratio": res.ratio,
        "poa_bound": poa_bound(args.k),
        "converged": game.converged,
        "rounds": game.round,
    }))
    return 0


def cmd_compare(args) -> int:
    algorithms = [a.strip() for a in args.algorithms.split(",") if a.strip()]
    if len(algorithms) < 2:
        raise ValueError("compare needs at least two algorithms")
    os.makedirs(args.out_dir, exist_ok=True)
    rows = []
    loads = {}
    curves = {}
    for algo in algorithms:
        cfg = _run_config(args, algo, os.path.join(args.out_dir, f"{algo}.parts"))
        cfg.track_memory = True
        run = run_partition(cfg)
        write_metrics_json(run, os.path.join(args.out_dir, f"{algo}.metrics.json"))
        rows.append({
            "algorithm": algo,
            "k": args.k,
            "rf": run.report.rf,
            "imbalance": run.report.imbalance,
            "runtime_ms": run.report.runtime_ms,
            "peak_mem_bytes": run.report.peak_mem_bytes,
        })
        loads[algo] = run.report.loads
        if args.degree_dump:
            dr = degree_resolved_rf(run.result, run.degrees)
            curves[algo] = dr
            rpt.write_degree_table(dr, os.path.join(args.out_dir, f"{algo}.degree_rf.tsv"))
    tsv_path, _ = rpt.write_table(rows, args.out_dir)
    rpt.fig_rf_bars(rows, os.path.join(args.out_dir, "rf.png"))
    rpt.fig_loads(loads, os.path.join(args.out_dir, "loads.png"))
    if curves:
        rpt.fig_degree_rf(curves, os.path.join(args.out_dir, "degree_rf.png"))
    print(rpt.format_table(rows))
    log.info("comparison table written to %s", tsv_path)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="s5p", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("partition", parents=[], help="partition an edge list")
    p.add_argument("--input", required=True, help="edge list path")
    p.add_argument("--output", default=None, help="partition output path")
    p.add_argument("--algorithm", choices=("s5p", "s5p-b", "dbh"), default="s5p")
    p.add_argument("--format", choices=("text", "binary"), default="text",
                   help="partition output format")
    p.add_argument("--track-memory", action="store_true")
    p.add_argument("--dump-clusters", action="store_true")
    p.add_argument("--dump-cluster-graph", action="store_true")
    _add_run_flags(p)
    p.set_defaults(func=cmd_partition)

    p = sub.add_parser("metrics", help="recompute metrics from saved artifacts")
    p.add_argument("--edges", required=True)
    p.add_argument("--partition", required=True)
    p.add_argument("--out", default=None, help="also write the JSON here")
    p.add_argument("--figures", default=None, help="directory for figures")
    p.set_defaults(func=cmd_metrics)

    p = sub.add_parser("gen-rmat", help="generate a synthetic power-law graph")
    p.add_argument("--out", required=True)
    p.add_argument("--scale", type=int, required=True, help="log2 of the vertex id space")
    p.add_argument("--edges", type=int, required=True)
    p.add_argument("--a", type=float, default=0.57)
    p.add_argument("--b", type=float, default=0.19)
    p.add_argument("--c", type=float, default=0.19)
    p.add_argument("--d", type=float, default=0.05)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--simple", action="store_true",
                   help="drop self-loops and duplicate edges")
    p.set_defaults(func=cmd_gen_rmat)

    p = sub.add_parser("oracle-rf", help="exhaustive optimal replication factor")
    p.add_argument("--input", required=True)
    p.add_argument("--k", type=int, required=True)
    p.set_defaults(func=cmd_oracle_rf)

    p = sub.add_parser("oracle-welfare", help="exhaustive optimal social welfare")
    p.add_argument("--input", required=True)
    _add_run_flags(p)
    p.set_defaults(func=cmd_oracle_welfare)

    p = sub.add_parser("compare", help="run several algorithms and tabulate")
    p.add_argument("--input", required=True)
    p.add_argument("--algorithms", default="s5p,dbh", help="comma-separated list")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--degree-dump", action="store_true",
                   help="emit per-degree replication tables and figure")
    _add_run_flags(p)
    p.set_defaults(func=cmd_compare)

    return parser


def main(argv=None) -> int:
    _setup_logging()
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (FormatError, ValueError, RuntimeError, OSError) as exc:
        print(f"s5p: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
