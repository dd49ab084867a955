from __future__ import annotations

import numpy as np
import pytest

from s5p.cluster_graph import ClusterGraph, SketchConfig, build_cluster_graph
from s5p.clustering import ClusteringConfig, cluster_stream
from s5p.game import GameConfig, init_game, run_game
from s5p.graph_io import EdgeStream, compute_degrees, open_edge_stream
from s5p.postprocess import PostprocessConfig, assign_edges


def write_edge_file(path, edges) -> str:
    with open(path, "wt", encoding="ascii") as f:
        for u, v in edges:
            f.write(f"{u} {v}\n")
    return str(path)


def make_stream(tmp_path, edges, name="graph.txt") -> EdgeStream:
    path = tmp_path / name
    write_edge_file(path, edges)
    return open_edge_stream(str(path))


def stream_with_degrees(tmp_path, edges, name="graph.txt"):
    stream = make_stream(tmp_path, edges, name)
    return stream, compute_degrees(stream)


def random_cluster_graph(rng: np.random.Generator, max_clusters=20,
                         mode="exact", edge_prob=0.4, max_theta=10,
                         min_clusters=1) -> ClusterGraph:
    n = int(rng.integers(min_clusters, max_clusters + 1))
    sizes = rng.integers(1, 20, size=n)
    kinds = rng.integers(0, 2, size=n)
    pair_counts = {}
    for a in range(n):
        for b in range(a + 1, n):
            if rng.random() < edge_prob:
                pair_counts[(a, b)] = int(rng.integers(1, max_theta + 1))
    return ClusterGraph.from_pair_counts(sizes, kinds, pair_counts, mode=mode)


def run_s5p_components(tmp_path, edges, k, tau=1.0, beta=1.0, bounded=False,
                       exact=True, sink=None, name="graph.txt"):
    """Run the pipeline stage by stage, returning every intermediate."""
    stream = make_stream(tmp_path, edges, name)
    degrees = compute_degrees(stream)
    ccfg = ClusteringConfig.for_stream(stream, k, beta=beta, bounded_mode=bounded)
    state = cluster_stream(stream, degrees, ccfg)
    graph = build_cluster_graph(stream, state, degrees, SketchConfig(seed=0),
                                exact=exact)
    gcfg = GameConfig(k=k, deterministic=True)
    game = run_game(init_game(graph, gcfg), gcfg)
    pcfg = PostprocessConfig(k=k, tau=tau, bounded_mode=bounded)
    result = assign_edges(stream, degrees, state, game.c2p, pcfg, sink=sink,
                          keep_assignment=True)
    return stream, degrees, state, graph, game, result


def random_edges(rng, n_vertices, n_edges):
    return [(int(rng.integers(0, n_vertices)), int(rng.integers(0, n_vertices)))
            for _ in range(n_edges)]


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
