"""One-pass streaming clustering with volume-capped migration.

Head edges (both endpoints above the degree threshold) are clustered by
global degree mass; tail edges by an incrementally tracked local degree.
Cluster volumes therefore satisfy, at every point of the pass:

  head cluster:  vol(c) == sum of global degrees of its members
  tail cluster:  vol(c) == sum of tail-local degrees of its members

A vertex's volume stake enters its cluster once, when the vertex is first
allocated, and moves with the vertex on migration. Migration is attempted
per edge and is capped by the maximum cluster volume kappa; the bounded
variant drops the cap and replaces local degrees with global ones.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .graph_io import DegreeTable, EdgeStream

HEAD = 0
TAIL = 1


@dataclass
class ClusteringConfig:
    xi: float
    kappa: float
    beta: float = 1.0
    bounded_mode: bool = False

    def __post_init__(self):
        if self.kappa <= 0 and not self.bounded_mode:
            raise ValueError(f"kappa must be positive, got {self.kappa}")

    @classmethod
    def for_stream(cls, stream: EdgeStream, k: int, beta: float = 1.0,
                   bounded_mode: bool = False) -> "ClusteringConfig":
        """Defaults: xi = beta * 2|E|/|V| and kappa = 2|E|/k."""
        if k < 1:
            raise ValueError(f"k must be >= 1, got {k}")
        xi = beta * 2.0 * stream.edge_count / stream.vertex_count
        kappa = 2.0 * stream.edge_count / k
        return cls(xi=xi, kappa=kappa, beta=beta, bounded_mode=bounded_mode)


@dataclass
class ClusterState:
    """Vertex-to-cluster tables plus per-cluster volumes and kinds.

    Cluster ids are allocated 0, 1, 2, ... in stream order, shared between
    head and tail clusters, so an id identifies exactly one cluster of one
    kind. -1 marks an unassigned vertex.
    """

    v2c_h: list = field(repr=False)
    v2c_t: list = field(repr=False)
    vol: list = field(repr=False)
    ld: list = field(repr=False)
    kind: list = field(repr=False)
    xi: float = 0.0

    @classmethod
    def empty(cls, vertex_count: int, xi: float = 0.0) -> "ClusterState":
        return cls(
            v2c_h=[-1] * vertex_count,
            v2c_t=[-1] * vertex_count,
            vol=[],
            ld=[0] * vertex_count,
            kind=[],
            xi=xi,
        )

    @property
    def n_clusters(self) -> int:
        return len(self.vol)

    def head_cluster_ids(self) -> list:
        return [c for c, k in enumerate(self.kind) if k == HEAD]

    def tail_cluster_ids(self) -> list:
        return [c for c, k in enumerate(self.kind) if k == TAIL]

    def as_arrays(self):
        """(v2c_h, v2c_t, vol, kind) as int64 numpy arrays."""
        return (
            np.asarray(self.v2c_h, dtype=np.int64),
            np.asarray(self.v2c_t, dtype=np.int64),
            np.asarray(self.vol, dtype=np.int64),
            np.asarray(self.kind, dtype=np.int64),
        )

    def dump(self, path: str) -> None:
        """Debug dump: one "v head_cluster tail_cluster" line per vertex."""
        with open(path, "wt", encoding="ascii") as f:
            for v, (ch, ct) in enumerate(zip(self.v2c_h, self.v2c_t)):
                f.write(f"{v} {ch} {ct}\n")


def _head_step(u, v, du, dv, v2c, vol, kind, kappa, bounded):
    cu = v2c[u]
    if cu < 0:
        cu = len(vol)
        vol.append(du)
        kind.append(HEAD)
        v2c[u] = cu
    cv = v2c[v]
    if cv < 0:
        cv = len(vol)
        vol.append(dv)
        kind.append(HEAD)
        v2c[v] = cv
    if cu == cv:
        return
    vol_u = vol[cu]
    vol_v = vol[cv]
    if not bounded and not (vol_u < kappa and vol_v < kappa):
        return
    # Migrate the endpoint with the smaller stake vol(c) - d; ties go to the
    # lower vertex id. The destination must stay under kappa after the move.
    su = vol_u - du
    sv = vol_v - dv
    if su < sv or (su == sv and u < v):
        i, ci, di, cj = u, cu, du, cv
    else:
        i, ci, di, cj = v, cv, dv, cu
    if bounded or vol[cj] + di < kappa:
        vol[cj] += di
        vol[ci] -= di
        v2c[i] = cj


def _tail_step(u, v, du, dv, v2c, vol, ld, kind, kappa, bounded):
    if bounded:
        # Bounded variant: global degrees everywhere, no volume cap.
        cu = v2c[u]
        if cu < 0:
            cu = len(vol)
            vol.append(du)
            kind.append(TAIL)
            v2c[u] = cu
        cv = v2c[v]
        if cv < 0:
            cv = len(vol)
            vol.append(dv)
            kind.append(TAIL)
            v2c[v] = cv
        if cu == cv:
            return
        if vol[cu] < vol[cv] or (vol[cu] == vol[cv] and u < v):
            i, ci, di, cj = u, cu, du, cv
        else:
            i, ci, di, cj = v, cv, dv, cu
        vol[cj] += di
        vol[ci] -= di
        v2c[i] = cj
        return

    cu = v2c[u]
    if cu < 0:
        cu = len(vol)
        vol.append(0)
        kind.append(TAIL)
        v2c[u] = cu
    cv = v2c[v]
    if cv < 0:
        cv = len(vol)
        vol.append(0)
        kind.append(TAIL)
        v2c[v] = cv
    ld[u] += 1
    ld[v] += 1
    vol[cu] += 1
    vol[cv] += 1
    if cu == cv:
        return
    vol_u = vol[cu]
    vol_v = vol[cv]
    if not (vol_u < kappa and vol_v < kappa):
        return
    if vol_u < vol_v or (vol_u == vol_v and u < v):
        i, ci, cj = u, cu, cv
    else:
        i, ci, cj = v, cv, cu
    stake = ld[i]
    vol[cj] += stake
    vol[ci] -= stake
    v2c[i] = cj


def head_edge_step(u: int, v: int, state: ClusterState, degrees: DegreeTable,
                   cfg: ClusteringConfig) -> ClusterState:
    """Apply the head-edge branch for a single edge (unit-test surface)."""
    deg = degrees.degree
    _head_step(int(u), int(v), int(deg[u]), int(deg[v]),
               state.v2c_h, state.vol, state.kind, cfg.kappa, cfg.bounded_mode)
    return state


def tail_edge_step(u: int, v: int, state: ClusterState, cfg: ClusteringConfig,
                   degrees: DegreeTable | None = None) -> ClusterState:
    """Apply the tail-edge branch for a single edge (unit-test surface)."""
    du = dv = 0
    if cfg.bounded_mode:
        if degrees is None:
            raise ValueError("bounded mode tail step needs the degree table")
        du = int(degrees.degree[u])
        dv = int(degrees.degree[v])
    _tail_step(int(u), int(v), du, dv,
               state.v2c_t, state.vol, state.ld, state.kind, cfg.kappa, cfg.bounded_mode)
    return state


def cluster_stream(stream: EdgeStream, degrees: DegreeTable,
                   cfg: ClusteringConfig) -> ClusterState:
    """Run the full clustering pass over the stream."""
    state = ClusterState.empty(stream.vertex_count, xi=cfg.xi)
    deg = degrees.degree
    v2c_h, v2c_t = state.v2c_h, state.v2c_t
    vol, ld, kind = state.vol, state.ld, state.kind
    kappa, bounded, xi = cfg.kappa, cfg.bounded_mode, cfg.xi
    for block in stream.blocks():
        us = block[:, 0].astype(np.int64)
        vs = block[:, 1].astype(np.int64)
        hm = ((deg[us] > xi) & (deg[vs] > xi)).tolist()
        du_l = deg[us].tolist()
        dv_l = deg[vs].tolist()
        us_l = us.tolist()
        vs_l = vs.tolist()
        for i in range(len(us_l)):
            if hm[i]:
                _head_step(us_l[i], vs_l[i], du_l[i], dv_l[i],
                           v2c_h, vol, kind, kappa, bounded)
            else:
                _tail_step(us_l[i], vs_l[i], du_l[i], dv_l[i],
                           v2c_t, vol, ld, kind, kappa, bounded)
    return state


__all__ = [
    "HEAD",
    "TAIL",
    "ClusteringConfig",
    "ClusterState",
    "cluster_stream",
    "head_edge_step",
    "tail_edge_step",
]
