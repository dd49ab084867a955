"""DBH baseline partitioner and exhaustive oracles for optimal RF and welfare.

The oracles enumerate the full assignment space (no pruning) except for one
symmetry cut: partition labels are interchangeable, so the first edge or
cluster is pinned to partition 0, which divides the work by k without
excluding any distinct solution.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cluster_graph import ClusterGraph
from .game import compute_delta
from .graph_io import DegreeTable, EdgeStream
from .postprocess import PartitionResult

RF_SPACE_GUARD = 10 ** 8
WELFARE_SPACE_GUARD = 10 ** 7
_BLOCK_ROWS = 1 << 18

_U64 = np.uint64
_MASK = (1 << 64) - 1


class OracleTooLarge(ValueError):
    """Enumeration space exceeds the configured guard."""


@dataclass
class OracleResult:
    opt_value: float
    arg: np.ndarray
    space: int
    ratio: float | None = None

    def with_ratio(self, algorithm_value: float) -> "OracleResult":
        self.ratio = algorithm_value / self.opt_value
        return self


def splitmix64(x):
    """64-bit avalanche mix; accepts uint64 arrays or Python ints."""
    if isinstance(x, (int, np.integer)):
        x = int(x) & _MASK
        x = (x + 0x9E3779B97F4A7C15) & _MASK
        x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
        x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK
        return x ^ (x >> 31)
    x = x.astype(np.uint64)
    x = x + _U64(0x9E3779B97F4A7C15)
    x = (x ^ (x >> _U64(30))) * _U64(0xBF58476D1CE4E5B9)
    x = (x ^ (x >> _U64(27))) * _U64(0x94D049BB133111EB)
    return x ^ (x >> _U64(31))


def partition_dbh(stream: EdgeStream, degrees: DegreeTable, k: int, seed: int = 0,
                  sink=None, keep_assignment: bool | None = None) -> PartitionResult:
    """Hash every edge by its lower-degree endpoint (ties: lower vertex id)."""
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if keep_assignment is None:
        keep_assignment = sink is None
    deg = degrees.degree
    seed64 = _U64(splitmix64(seed))
    loads = np.zeros(k, dtype=np.int64)
    replicas = [0] * stream.vertex_count
    kept = []
    for block in stream.blocks():
        us = block[:, 0].astype(np.int64)
        vs = block[:, 1].astype(np.int64)
        du = deg[us]
        dv = deg[vs]
        pick_u = (du < dv) | ((du == dv) & (us <= vs))
        chosen = np.where(pick_u, us, vs).astype(np.uint64)
        ps = (splitmix64(chosen ^ seed64) % _U64(k)).astype(np.int64)
        loads += np.bincount(ps, minlength=k)
        verts = np.concatenate([us, vs])
        parts = np.concatenate([ps, ps])
        for key in np.unique(verts * k + parts).tolist():
            replicas[key // k] |= 1 << (key % k)
        if sink is not None:
            sink.write_block(us, vs, ps)
        if keep_assignment:
            kept.append(ps)
    return PartitionResult(
        k=k,
        edge_count=stream.edge_count,
        vertex_count=stream.vertex_count,
        load=loads,
        replicas=replicas,
        assignment=np.concatenate(kept) if kept else None,
    )


def _digit_matrix(start: int, count: int, n_digits: int, k: int) -> np.ndarray:
    """Rows are assignments: digit j of (index * k) in base k, digit 0 pinned 0."""
    idx = np.arange(start, start + count, dtype=np.int64)
    out = np.zeros((count, n_digits), dtype=np.int64)
    for j in range(1, n_digits):
        out[:, j] = (idx // k ** (j - 1)) % k
    return out


def oracle_optimal_rf(edges, k: int) -> OracleResult:
    """Exhaustive minimum replication factor over all edge assignments."""
    edges = [(int(u), int(v)) for u, v in edges]
    m = len(edges)
    if m == 0:
        raise ValueError("no edges")
    if k < 1:
        raise ValueError("k must be >= 1")
    space = k ** m
    if space > RF_SPACE_GUARD:
        raise OracleTooLarge(f"k^|E| = {space} exceeds guard {RF_SPACE_GUARD}")
    remap: dict[int, int] = {}
    incident: list[list[int]] = []
    for e, (u, v) in enumerate(edges):
        for w in (u, v):
            if w not in remap:
                remap[w] = len(remap)
                incident.append([])
            incident[remap[w]].append(e)
    n_vertices = len(remap)

    best_value = np.inf
    best_arg: np.ndarray | None = None
    reduced = space // k
    for start in range(0, reduced, _BLOCK_ROWS):
        count = min(_BLOCK_ROWS, reduced - start)
        digits = _digit_matrix(start, count, m, k)
        total = np.zeros(count, dtype=np.int64)
        for cols in incident:
            mask = np.zeros(count, dtype=np.int64)
            for e in cols:
                mask |= np.int64(1) << digits[:, e]
            total += np.bitwise_count(mask.astype(np.uint64)).astype(np.int64)
        local = int(total.argmin())
        value = total[local] / n_vertices
        if value < best_value:
            best_value = float(value)
            best_arg = digits[local].copy()
    return OracleResult(opt_value=best_value, arg=best_arg, space=space)


def oracle_optimal_welfare(graph: ClusterGraph, k: int,
                           delta: float | None = None) -> OracleResult:
    """Exhaustive minimum social welfare over all cluster assignments."""
    n = graph.n_clusters
    if n == 0:
        raise ValueError("no clusters")
    if k < 1:
        raise ValueError("k must be >= 1")
    space = k ** n
    if space > WELFARE_SPACE_GUARD:
        raise OracleTooLarge(f"k^|C| = {space} exceeds guard {WELFARE_SPACE_GUARD}")
    if delta is None:
        delta = compute_delta(graph, k)
    sizes = graph.size.astype(np.float64)
    total_size = float(sizes.sum())
    pa, pb, pt = graph.pairs_a, graph.pairs_b, graph.pairs_theta

    best_value = np.inf
    best_arg: np.ndarray | None = None
    reduced = space // k
    for start in range(0, reduced, _BLOCK_ROWS):
        count = min(_BLOCK_ROWS, reduced - start)
        digits = _digit_matrix(start, count, n, k)
        balance = np.zeros(count)
        for p in range(k):
            balance += np.square((digits == p).astype(np.float64) @ sizes)
        crossing = np.zeros(count)
        for a, b, t in zip(pa.tolist(), pb.tolist(), pt.tolist()):
            crossing += t * (digits[:, a] != digits[:, b])
        welfare = (delta * balance + 2.0 * crossing + total_size) / k
        local = int(welfare.argmin())
        if welfare[local] < best_value:
            best_value = float(welfare[local])
            best_arg = digits[local].copy()
    return OracleResult(opt_value=best_value, arg=best_arg, space=space)
