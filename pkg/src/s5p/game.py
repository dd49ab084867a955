"""Two-stage best-response game assigning clusters to partitions.

Head clusters (leaders) best-respond first each round, tail clusters
(followers) after them. A cluster's cost for choosing partition p combines
a load-balance term, scaled by the normalization factor delta, with the
count of its inter-cluster edges crossing out of p. The sum of all cluster
costs equals the social welfare, so every strictly improving move lowers
the welfare and the dynamics terminate at a pure Nash equilibrium or at
the round cap.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .cluster_graph import ClusterGraph

log = logging.getLogger("s5p.game")


@dataclass
class GameConfig:
    k: int
    max_rounds: int = 50
    batch_size: int = 256
    threads: int = 16
    deterministic: bool = False
    record_moves: bool = False

    def __post_init__(self):
        if self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")
        if self.max_rounds < 1:
            raise ValueError("max_rounds must be >= 1")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.threads < 1:
            raise ValueError("threads must be >= 1")


@dataclass
class MoveRecord:
    round: int
    stage: int
    cluster: int
    src: int
    dst: int
    welfare: float


@dataclass
class GameState:
    graph: ClusterGraph
    k: int
    c2p: np.ndarray
    part_size: np.ndarray
    delta: float
    round: int = 0
    converged: bool = False
    moves: list = field(default_factory=list, repr=False)


def compute_delta(graph: ClusterGraph, k: int) -> float:
    """Upper end of the normalization range: k * sum(F + |c|) / (sum |c|)^2.

    F is each cluster's total inter-cluster count, i.e. the worst case in
    which every neighbor sits in a different partition.
    """
    total = graph.total_size
    if total == 0:
        raise ValueError("cluster graph has zero total size")
    return k * float(graph.f_total().sum() + total) / float(total) ** 2


def delta_lower_bound(graph: ClusterGraph) -> float:
    return 1.0 / graph.total_size


def init_game(graph: ClusterGraph, cfg: GameConfig) -> GameState:
    """Round-robin initial assignment (cluster c to partition c mod k)."""
    n = graph.n_clusters
    c2p = np.arange(n, dtype=np.int64) % cfg.k
    part_size = np.bincount(c2p, weights=graph.size.astype(np.float64), minlength=cfg.k)
    return GameState(
        graph=graph,
        k=cfg.k,
        c2p=c2p,
        part_size=part_size.astype(np.int64),
        delta=compute_delta(graph, cfg.k),
    )


def _cost_vector(state: GameState, c: int) -> np.ndarray:
    """Cost of cluster c for every candidate partition.

    The load term uses the partition size as it would be after the move;
    the current partition already contains c, so its size is used as is.
    """
    graph = state.graph
    k = state.k
    size_c = int(graph.size[c])
    cur = int(state.c2p[c])
    nbrs = graph.neighbors[c]
    if len(nbrs):
        to_p = np.bincount(state.c2p[nbrs], weights=graph.theta_rows[c], minlength=k)
        f_tot = graph.theta_rows[c].sum()
    else:
        to_p = np.zeros(k)
        f_tot = 0.0
    post_sizes = state.part_size + size_c
    post_sizes[cur] = state.part_size[cur]
    return (state.delta / k) * size_c * post_sizes + (f_tot - to_p + size_c) / k


def cluster_cost(c: int, p: int, state: GameState) -> float:
    return float(_cost_vector(state, c)[p])


def best_response(c: int, state: GameState) -> int:
    """Partition with minimal cost; ties keep the current partition, then
    prefer the lowest partition id."""
    costs = _cost_vector(state, c)
    cur = int(state.c2p[c])
    best = costs.min()
    if costs[cur] == best:
        return cur
    return int(costs.argmin())


def social_welfare(state: GameState) -> float:
    """delta * sum |p|^2 / k plus the per-partition crossing counts."""
    graph = state.graph
    sizes_sq = np.square(state.part_size.astype(np.float64)).sum()
    crossing = graph.pairs_theta[
        state.c2p[graph.pairs_a] != state.c2p[graph.pairs_b]
    ].sum() if len(graph.pairs_a) else 0.0
    return (state.delta * sizes_sq + 2.0 * crossing + graph.total_size) / state.k


def _apply_move(state: GameState, c: int, dst: int) -> None:
    src = int(state.c2p[c])
    size_c = int(state.graph.size[c])
    state.part_size[src] -= size_c
    state.part_size[dst] += size_c
    state.c2p[c] = dst


def _stage(state: GameState, cfg: GameConfig, ids: np.ndarray, stage_no: int,
           pool: ThreadPoolExecutor | None) -> int:
    """One decision stage: batches of proposals computed against the state
    frozen at batch start, applied serially in ascending cluster id.

    A proposal is re-checked against the live state before it is applied, so
    every accepted move strictly lowers the mover's cost (and the welfare)
    even when earlier moves in the same batch changed the landscape.
    """
    moves = 0
    batch_size = 1 if cfg.deterministic else cfg.batch_size
    for start in range(0, len(ids), batch_size):
        batch = ids[start:start + batch_size]
        if pool is not None and len(batch) > 1:
            chunks = np.array_split(batch, min(cfg.threads, len(batch)))
            proposals = []
            for part in pool.map(
                    lambda chunk: [(int(c), best_response(int(c), state)) for c in chunk],
                    chunks):
                proposals.extend(part)
        else:
            proposals = [(int(c), best_response(int(c), state)) for c in batch]
        for c, p in proposals:
            cur = int(state.c2p[c])
            if p == cur:
                continue
            if len(batch) > 1:
                costs = _cost_vector(state, c)
                if not costs[p] < costs[cur]:
                    continue
            _apply_move(state, c, p)
            moves += 1
            if cfg.record_moves:
                state.moves.append(MoveRecord(
                    round=state.round, stage=stage_no, cluster=c,
                    src=cur, dst=p, welfare=social_welfare(state)))
    return moves


def run_game(state: GameState, cfg: GameConfig) -> GameState:
    """Alternate leader and follower stages until no cluster moves or the
    round cap is reached."""
    graph = state.graph
    nonzero = graph.size > 0
    head_ids = np.flatnonzero((graph.kind == 0) & nonzero)
    tail_ids = np.flatnonzero((graph.kind == 1) & nonzero)
    pool = None
    if not cfg.deterministic and cfg.threads > 1:
        pool = ThreadPoolExecutor(max_workers=cfg.threads)
    try:
        for rnd in range(1, cfg.max_rounds + 1):
            state.round = rnd
            moved = _stage(state, cfg, head_ids, 1, pool)
            moved += _stage(state, cfg, tail_ids, 2, pool)
            if log.isEnabledFor(logging.INFO):
                log.info("round=%d moves=%d welfare=%.6g", rnd, moved, social_welfare(state))
            if moved == 0:
                state.converged = True
                break
    finally:
        if pool is not None:
            pool.shutdown(wait=False)
    return state


def is_pure_nash(state: GameState) -> bool:
    """Exhaustive deviation scan: no cluster has a strictly cheaper partition."""
    for c in range(state.graph.n_clusters):
        costs = _cost_vector(state, c)
        if costs.min() < costs[int(state.c2p[c])]:
            return False
    return True
