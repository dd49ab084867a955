"""Final edge-to-partition assignment from converged cluster decisions.

Each edge lands in one of its endpoint clusters' partitions, preferring the
less loaded one. A partition is full once its load reaches L = tau*|E|/k;
when both candidate partitions are full, head edges scan partitions in
ascending id and tail edges in descending id for the first one with room,
which keeps overflow spill from the two edge populations on opposite ends
of the partition range. The bounded variant drops the cap entirely.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass

import numpy as np

from .cluster_graph import InternalConsistencyError, resolve_clusters
from .clustering import ClusterState
from .graph_io import DegreeTable, EdgeStream

PARTITION_MAGIC = b"S5PP"
PARTITION_VERSION = 1
_PHEADER = struct.Struct("<4sIQ")


class InfeasibleError(RuntimeError):
    """No partition has room under the load cap."""


@dataclass
class PostprocessConfig:
    k: int
    tau: float = 1.0
    load_cap: float | None = None
    bounded_mode: bool = False

    def __post_init__(self):
        if self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")
        if self.tau <= 0:
            raise ValueError(f"tau must be positive, got {self.tau}")

    def cap_for(self, edge_count: int) -> float:
        """L = tau * |E| / k; infinite in bounded mode."""
        if self.bounded_mode:
            return math.inf
        if self.load_cap is not None:
            return self.load_cap
        return self.tau * edge_count / self.k


@dataclass
class PartitionResult:
    """Edge assignment, per-partition loads and per-vertex replica sets."""

    k: int
    edge_count: int
    vertex_count: int
    load: np.ndarray
    replicas: list
    assignment: np.ndarray | None = None

    def replica_counts(self) -> np.ndarray:
        """|P(v)| for every vertex."""
        return np.array([m.bit_count() for m in self.replicas], dtype=np.int64)

    def partitions_of(self, v: int) -> list:
        mask = self.replicas[v]
        return [p for p in range(self.k) if mask >> p & 1]


def choose_partition(p_u: int, p_v: int, loads: list, cap: float, is_head: bool, k: int) -> int:
    """Placement rule for one edge given current loads."""
    lu = loads[p_u]
    lv = loads[p_v]
    if lu >= cap and lv >= cap:
        candidates = range(k) if is_head else range(k - 1, -1, -1)
        for p in candidates:
            if loads[p] < cap:
                return p
        raise InfeasibleError(f"all {k} partitions at load cap {cap}")
    if lu >= cap:
        return p_v
    if lv >= cap:
        return p_u
    if lu > lv:
        return p_v
    return p_u


class TextPartitionWriter:
    """One "u v p" line per edge, in stream order."""

    def __init__(self, path: str):
        self._f = open(path, "wt", encoding="ascii")

    def write_block(self, us, vs, ps) -> None:
        self._f.writelines(
            f"{u} {v} {p}\n" for u, v, p in zip(us.tolist(), vs.tolist(), ps.tolist()))

    def close(self) -> None:
        self._f.close()


class BinaryPartitionWriter:
    """Magic, version and edge count, then one u32 partition id per edge."""

    def __init__(self, path: str, edge_count: int):
        self._f = open(path, "wb")
        self._f.write(_PHEADER.pack(PARTITION_MAGIC, PARTITION_VERSION, edge_count))

    def write_block(self, us, vs, ps) -> None:
        self._f.write(ps.astype("<u4").tobytes())

    def close(self) -> None:
        self._f.close()


def read_partition_text(path: str):
    us, vs, ps = [], [], []
    with open(path, "rt", encoding="ascii") as f:
        for lineno, line in enumerate(f, 1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            parts = stripped.split()
            if len(parts) != 3:
                raise ValueError(f"{path}:{lineno}: expected 'u v p'")
            us.append(int(parts[0]))
            vs.append(int(parts[1]))
            ps.append(int(parts[2]))
    return (np.asarray(us, dtype=np.int64), np.asarray(vs, dtype=np.int64),
            np.asarray(ps, dtype=np.int64))


def read_partition_binary(path: str) -> np.ndarray:
    with open(path, "rb") as f:
        header = f.read(_PHEADER.size)
        magic, version, count = _PHEADER.unpack(header)
        if magic != PARTITION_MAGIC:
            raise ValueError(f"{path}: bad magic {magic!r}")
        if version != PARTITION_VERSION:
            raise ValueError(f"{path}: unsupported version {version}")
        ps = np.fromfile(f, dtype="<u4", count=count)
        if len(ps) != count:
            raise ValueError(f"{path}: header claims {count} edges, file holds {len(ps)}")
    return ps.astype(np.int64)


def assign_edges(stream: EdgeStream, degrees: DegreeTable, state: ClusterState,
                 c2p: np.ndarray, cfg: PostprocessConfig,
                 sink=None, keep_assignment: bool | None = None) -> PartitionResult:
    """One sequential pass placing every edge (order-sensitive loads).

    With a sink, per-edge partition ids are streamed out block by block and
    not retained unless keep_assignment is set.
    """
    if keep_assignment is None:
        keep_assignment = sink is None
    k = cfg.k
    cap = cfg.cap_for(stream.edge_count)
    v2c_h, v2c_t, _, _ = state.as_arrays()
    deg = degrees.degree
    xi = state.xi
    c2p = np.asarray(c2p, dtype=np.int64)
    loads = [0] * k
    replicas = [0] * stream.vertex_count
    kept: list[np.ndarray] = []

    for block in stream.blocks():
        us, vs, cu, cv = resolve_clusters(block, deg, xi, v2c_h, v2c_t)
        missing = (cu < 0) | (cv < 0)
        if missing.any():
            bad = int(np.flatnonzero(missing)[0])
            raise InternalConsistencyError(
                f"edge ({int(us[bad])}, {int(vs[bad])}) has no cluster entry")
        hm = (deg[us] > xi) & (deg[vs] > xi)
        pu_l = c2p[cu].tolist()
        pv_l = c2p[cv].tolist()
        us_l = us.tolist()
        vs_l = vs.tolist()
        hm_l = hm.tolist()
        ps = [0] * len(us_l)
        for i in range(len(us_l)):
            p_u = pu_l[i]
            p_v = pv_l[i]
            lu = loads[p_u]
            lv = loads[p_v]
            if lu >= cap and lv >= cap:
                p = choose_partition(p_u, p_v, loads, cap, hm_l[i], k)
            elif lu >= cap:
                p = p_v
            elif lv >= cap:
                p = p_u
            elif lu > lv:
                p = p_v
            else:
                p = p_u
            loads[p] += 1
            bit = 1 << p
            replicas[us_l[i]] |= bit
            replicas[vs_l[i]] |= bit
            ps[i] = p
        ps_arr = np.asarray(ps, dtype=np.int64)
        if sink is not None:
            sink.write_block(us, vs, ps_arr)
        if keep_assignment:
            kept.append(ps_arr)

    assignment = np.concatenate(kept) if kept else None
    return PartitionResult(
        k=k,
        edge_count=stream.edge_count,
        vertex_count=stream.vertex_count,
        load=np.asarray(loads, dtype=np.int64),
        replicas=replicas,
        assignment=assignment,
    )


def replicas_from_assignment(stream: EdgeStream, assignment: np.ndarray, k: int) -> list:
    """Recompute per-vertex replica sets from an edge assignment alone."""
    replicas = [0] * stream.vertex_count
    offset = 0
    assignment = np.asarray(assignment, dtype=np.int64)
    for block in stream.blocks():
        n = len(block)
        ps = assignment[offset:offset + n]
        offset += n
        verts = np.concatenate([block[:, 0].astype(np.int64), block[:, 1].astype(np.int64)])
        parts = np.concatenate([ps, ps])
        for key in np.unique(verts * k + parts).tolist():
            replicas[key // k] |= 1 << (key % k)
    if offset != len(assignment):
        raise ValueError(f"assignment covers {len(assignment)} edges, stream has {offset}")
    return replicas


def result_from_assignment(stream: EdgeStream, assignment: np.ndarray, k: int) -> PartitionResult:
    """Wrap a raw edge->partition array into a full result."""
    assignment = np.asarray(assignment, dtype=np.int64)
    if len(assignment) != stream.edge_count:
        raise ValueError(
            f"assignment covers {len(assignment)} edges, stream has {stream.edge_count}")
    if len(assignment) and (assignment.min() < 0 or assignment.max() >= k):
        raise ValueError("partition ids out of range")
    return PartitionResult(
        k=k,
        edge_count=stream.edge_count,
        vertex_count=stream.vertex_count,
        load=np.bincount(assignment, minlength=k).astype(np.int64),
        replicas=replicas_from_assignment(stream, assignment, k),
        assignment=assignment,
    )
