"""End-to-end orchestration: degrees -> clustering -> cluster graph -> game
-> assignment, with timing, optional memory tracking and metrics assembly."""

from __future__ import annotations

import contextlib
import json
import logging
import time
from dataclasses import dataclass

from . import metrics as qm
from .cluster_graph import ClusterGraph, SketchConfig, build_cluster_graph
from .clustering import ClusteringConfig, ClusterState, cluster_stream
from .game import GameConfig, GameState, init_game, run_game
from .graph_io import DegreeTable, EdgeStream, compute_degrees, open_edge_stream
from .postprocess import (
    BinaryPartitionWriter,
    PartitionResult,
    PostprocessConfig,
    TextPartitionWriter,
    assign_edges,
)
from .reference import partition_dbh

log = logging.getLogger("s5p.pipeline")

ALGORITHMS = ("s5p", "s5p-b", "dbh")


@dataclass
class RunConfig:
    input: str
    algorithm: str = "s5p"
    k: int = 4
    tau: float = 1.0
    beta: float = 1.0
    epsilon: float = 0.1
    nu: float = 0.01
    batch_size: int = 256
    threads: int = 16
    max_rounds: int = 50
    seed: int = 0
    output: str | None = None
    output_format: str = "text"
    input_format: str = "auto"
    deterministic: bool = False
    theta_mode: str = "sketch"
    track_memory: bool = False
    dump_clusters: bool = False
    dump_cluster_graph: bool = False

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"unknown algorithm {self.algorithm!r}, expected one of {ALGORITHMS}")
        if self.theta_mode not in ("sketch", "exact"):
            raise ValueError(f"theta_mode must be 'sketch' or 'exact', got {self.theta_mode!r}")
        if self.output_format not in ("text", "binary"):
            raise ValueError(f"output_format must be 'text' or 'binary'")
        if self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")


@dataclass
class RunResult:
    config: RunConfig
    stream: EdgeStream
    degrees: DegreeTable
    result: PartitionResult
    report: qm.QualityReport
    skew: qm.SkewnessReport
    bounds: dict
    phases: dict
    cluster_state: ClusterState | None = None
    cluster_graph: ClusterGraph | None = None
    game: GameState | None = None

    def metrics_json(self) -> dict:
        return qm.report_dict(self.report, self.skew, self.bounds)


def measured_bounds(degrees: DegreeTable, skew: qm.SkewnessReport, xi: float, k: int) -> dict:
    """Bound calculators fed with measured graph statistics; entries are null
    when the measured exponent leaves the bound's domain."""
    bounds: dict = {"poa_bound": qm.poa_bound(k)}
    chi_head = float((degrees.degree > xi).mean())
    try:
        inputs = qm.BoundInputs(
            rho=skew.rho, k=max(k, 2), d_min=max(degrees.d_min, 1),
            d_max=degrees.d_max, xi=xi, n_vertices=len(degrees),
            chi_head=chi_head,
        )
        bounds["rf_bound"] = qm.rf_bound(inputs)
        bounds["rd_bound"] = qm.rd_bound(inputs)
    except qm.BoundDomainError:
        bounds["rf_bound"] = None
        bounds["rd_bound"] = None
    return bounds


def _make_sink(cfg: RunConfig, stream: EdgeStream):
    if cfg.output is None:
        return None
    if cfg.output_format == "binary":
        return BinaryPartitionWriter(cfg.output, stream.edge_count)
    return TextPartitionWriter(cfg.output)


def run_partition(cfg: RunConfig) -> RunResult:
    """Run the configured partitioner over the input and assemble metrics."""
    timer = _PhaseTimer()
    mem = qm.PeakMemory() if cfg.track_memory else None
    if mem is not None:
        mem.__enter__()
    t_start = time.perf_counter()

    with timer.phase("open"):
        stream = open_edge_stream(cfg.input, cfg.input_format)
    with timer.phase("degrees"):
        degrees = compute_degrees(stream)

    sink = _make_sink(cfg, stream)
    cluster_state = None
    cluster_graph = None
    game_state = None
    try:
        if cfg.algorithm == "dbh":
            with timer.phase("assign"):
                result = partition_dbh(stream, degrees, cfg.k, cfg.seed, sink=sink)
        else:
            bounded = cfg.algorithm == "s5p-b"
            ccfg = ClusteringConfig.for_stream(stream, cfg.k, beta=cfg.beta,
                                               bounded_mode=bounded)
            with timer.phase("cluster"):
                cluster_state = cluster_stream(stream, degrees, ccfg)
            with timer.phase("cluster_graph"):
                cluster_graph = build_cluster_graph(
                    stream, cluster_state, degrees,
                    SketchConfig(epsilon=cfg.epsilon, nu=cfg.nu, seed=cfg.seed),
                    exact=cfg.theta_mode == "exact",
                )
            gcfg = GameConfig(k=cfg.k, max_rounds=cfg.max_rounds,
                              batch_size=cfg.batch_size, threads=cfg.threads,
                              deterministic=cfg.deterministic)
            with timer.phase("game"):
                game_state = run_game(init_game(cluster_graph, gcfg), gcfg)
            pcfg = PostprocessConfig(k=cfg.k, tau=cfg.tau, bounded_mode=bounded)
            with timer.phase("assign"):
                result = assign_edges(stream, degrees, cluster_state,
                                      game_state.c2p, pcfg, sink=sink)
    finally:
        if sink is not None:
            sink.close()

    runtime_ms = (time.perf_counter() - t_start) * 1000.0
    if mem is not None:
        mem.__exit__(None, None, None)

    skew = qm.skewness(degrees, stream.vertex_count, stream.edge_count)
    xi = cfg.beta * 2.0 * stream.edge_count / stream.vertex_count
    bounds = measured_bounds(degrees, skew, xi, cfg.k)
    report = qm.quality_report(result, runtime_ms=runtime_ms,
                               peak_mem_bytes=mem.peak if mem else None)
    for name, ms in timer.items():
        log.info("phase %s: %.1f ms", name, ms)

    if cfg.dump_clusters and cluster_state is not None and cfg.output:
        cluster_state.dump(cfg.output + ".clusters")
    if cfg.dump_cluster_graph and cluster_graph is not None and cfg.output:
        cluster_graph.dump_json(cfg.output + ".cluster_graph.json")

    return RunResult(
        config=cfg,
        stream=stream,
        degrees=degrees,
        result=result,
        report=report,
        skew=skew,
        bounds=bounds,
        phases=dict(timer.items()),
        cluster_state=cluster_state,
        cluster_graph=cluster_graph,
        game=game_state,
    )


def write_metrics_json(run: RunResult, path: str) -> None:
    with open(path, "wt", encoding="ascii") as f:
        json.dump(run.metrics_json(), f, indent=2)
        f.write("\n")


class _PhaseTimer:
    def __init__(self):
        self._times: dict[str, float] = {}

    @contextlib.contextmanager
    def phase(self, name: str):
        t0 = time.perf_counter()
        try:
            yield
        finally:
            elapsed = (time.perf_counter() - t0) * 1000.0
            self._times[name] = self._times.get(name, 0.0) + elapsed

    def items(self):
        return self._times.items()
