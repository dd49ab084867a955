import numpy as np
import pytest

from s5p.cluster_graph import ClusterGraph
from s5p.clustering import HEAD, TAIL
from s5p.game import (
    GameConfig,
    GameState,
    best_response,
    cluster_cost,
    compute_delta,
    delta_lower_bound,
    init_game,
    is_pure_nash,
    run_game,
    social_welfare,
)

from conftest import random_cluster_graph


def two_cluster_instance(delta=1.0):
    """Sizes 2 and 3 with 4 edges between them, k=2, both in partition 0."""
    graph = ClusterGraph.from_pair_counts([2, 3], [HEAD, HEAD], {(0, 1): 4})
    state = GameState(graph=graph, k=2, c2p=np.array([0, 0], dtype=np.int64),
                      part_size=np.array([5, 0], dtype=np.int64), delta=delta)
    return graph, state


def random_state(graph, k, rng):
    c2p = rng.integers(0, k, size=graph.n_clusters).astype(np.int64)
    part_size = np.bincount(c2p, weights=graph.size.astype(float), minlength=k)
    return GameState(graph=graph, k=k, c2p=c2p,
                     part_size=part_size.astype(np.int64),
                     delta=compute_delta(graph, k))


def test_init_round_robin():
    graph = ClusterGraph.from_pair_counts([1, 1, 1], [HEAD, TAIL, TAIL], {})
    state = init_game(graph, GameConfig(k=3))
    assert state.c2p.tolist() == [0, 1, 2]


def test_init_part_sizes_consistent(rng):
    graph = random_cluster_graph(rng)
    state = init_game(graph, GameConfig(k=4))
    expected = np.bincount(state.c2p, weights=graph.size.astype(float), minlength=4)
    assert state.part_size.tolist() == expected.astype(int).tolist()


def test_k_zero_rejected():
    with pytest.raises(ValueError):
        GameConfig(k=0)


def test_delta_two_unit_clusters():
    graph = ClusterGraph.from_pair_counts([1, 1], [TAIL, TAIL], {(0, 1): 1})
    assert compute_delta(graph, 2) == pytest.approx(2.0)


def test_delta_single_cluster_inverse_size():
    for s in (1, 4, 9):
        graph = ClusterGraph.from_pair_counts([s], [HEAD], {})
        assert compute_delta(graph, 1) == pytest.approx(1.0 / s)


def test_delta_respects_lower_bound(rng):
    for _ in range(25):
        graph = random_cluster_graph(rng)
        k = int(rng.integers(1, 9))
        delta = compute_delta(graph, k)
        assert delta >= delta_lower_bound(graph) - 1e-12


def test_delta_zero_total_size_errors():
    graph = ClusterGraph.from_pair_counts([0], [HEAD], {})
    with pytest.raises(ValueError):
        compute_delta(graph, 2)


def test_cluster_cost_worked_instance():
    _, state = two_cluster_instance(delta=1.0)
    # Co-locating cluster 0 with cluster 1 costs (1/2)*2*5 + (0+2)/2 = 6;
    # separating costs (1/2)*2*2 + (4+2)/2 = 5.
    assert cluster_cost(0, 0, state) == pytest.approx(6.0)
    assert cluster_cost(0, 1, state) == pytest.approx(5.0)


def test_best_response_prefers_separation():
    _, state = two_cluster_instance(delta=1.0)
    assert best_response(0, state) == 1


def test_cluster_cost_isolated_cluster_indifferent():
    graph = ClusterGraph.from_pair_counts([3], [HEAD], {})
    state = init_game(graph, GameConfig(k=4))
    costs = [cluster_cost(0, p, state) for p in range(4)]
    assert all(c == pytest.approx(costs[0]) for c in costs)
    assert best_response(0, state) == int(state.c2p[0])


def test_cost_indicator_against_candidate_partition():
    graph = ClusterGraph.from_pair_counts([2, 2], [TAIL, TAIL], {(0, 1): 5})
    state = GameState(graph=graph, k=3, c2p=np.array([0, 2]),
                      part_size=np.array([2, 0, 2]), delta=0.0)
    # Evaluating the neighbor's partition drops the crossing term entirely.
    assert cluster_cost(0, 2, state) == pytest.approx((0 + 2) / 3)
    assert cluster_cost(0, 0, state) == pytest.approx((5 + 2) / 3)
    assert cluster_cost(0, 1, state) == pytest.approx((5 + 2) / 3)


def test_best_response_k1():
    graph = ClusterGraph.from_pair_counts([2, 3], [HEAD, TAIL], {(0, 1): 1})
    state = init_game(graph, GameConfig(k=1))
    assert best_response(0, state) == 0
    assert best_response(1, state) == 0


def test_welfare_single_partition_no_crossing():
    sizes = [2, 3, 4]
    graph = ClusterGraph.from_pair_counts(sizes, [HEAD, TAIL, TAIL], {})
    k = 3
    state = GameState(graph=graph, k=k, c2p=np.zeros(3, dtype=np.int64),
                      part_size=np.array([9, 0, 0]), delta=compute_delta(graph, k))
    expected = state.delta * 81 / k + 9 / k
    assert social_welfare(state) == pytest.approx(expected)


def test_welfare_equals_sum_of_costs(rng):
    for _ in range(20):
        graph = random_cluster_graph(rng)
        k = int(rng.integers(1, 9))
        for _ in range(5):
            state = random_state(graph, k, rng)
            total = sum(cluster_cost(c, int(state.c2p[c]), state)
                        for c in range(graph.n_clusters))
            welfare = social_welfare(state)
            assert abs(welfare - total) <= 1e-9 * abs(welfare)


def test_run_game_converges_and_is_nash(rng):
    for _ in range(10):
        graph = random_cluster_graph(rng, max_clusters=10)
        cfg = GameConfig(k=int(rng.integers(2, 5)), deterministic=True)
        state = run_game(init_game(graph, cfg), cfg)
        assert state.converged
        assert is_pure_nash(state)


def test_equilibrium_returns_immediately():
    graph = ClusterGraph.from_pair_counts([5], [HEAD], {})
    cfg = GameConfig(k=2, deterministic=True)
    state = run_game(init_game(graph, cfg), cfg)
    assert state.converged
    assert state.round == 1


def test_k1_converges_in_one_round(rng):
    graph = random_cluster_graph(rng)
    cfg = GameConfig(k=1, deterministic=True)
    state = run_game(init_game(graph, cfg), cfg)
    assert state.converged
    assert state.round == 1
    assert set(state.c2p.tolist()) == {0}


def test_each_move_strictly_decreases_welfare(rng):
    seen_moves = 0
    for _ in range(10):
        graph = random_cluster_graph(rng, max_clusters=12)
        cfg = GameConfig(k=3, deterministic=True, record_moves=True)
        state = init_game(graph, cfg)
        previous = social_welfare(
            GameState(graph=graph, k=cfg.k, c2p=state.c2p.copy(),
                      part_size=state.part_size.copy(), delta=state.delta))
        run_game(state, cfg)
        for move in state.moves:
            assert move.welfare < previous - 0.0
            previous = move.welfare
        seen_moves += len(state.moves)
    assert seen_moves > 0


def test_leaders_move_before_followers(rng):
    seen_head = seen_tail = 0
    for seed in range(8):
        local = np.random.default_rng(seed)
        graph = random_cluster_graph(local, max_clusters=14)
        cfg = GameConfig(k=3, deterministic=True, record_moves=True)
        state = run_game(init_game(graph, cfg), cfg)
        by_round: dict = {}
        for move in state.moves:
            by_round.setdefault(move.round, []).append(move)
            kind = int(graph.kind[move.cluster])
            if move.stage == 1:
                assert kind == HEAD
                seen_head += 1
            else:
                assert kind == TAIL
                seen_tail += 1
        for moves in by_round.values():
            stages = [m.stage for m in moves]
            assert stages == sorted(stages)
    assert seen_head > 0 and seen_tail > 0


def test_parallel_mode_matches_batch_semantics(rng):
    graph = random_cluster_graph(rng, max_clusters=18)
    base = None
    for threads in (2, 8):
        cfg = GameConfig(k=4, batch_size=4, threads=threads)
        state = run_game(init_game(graph, cfg), cfg)
        assert state.converged
        assert is_pure_nash(state)
        if base is None:
            base = state.c2p.tolist()
        else:
            assert state.c2p.tolist() == base


def test_deterministic_mode_reproducible(rng):
    graph = random_cluster_graph(rng, max_clusters=16)
    cfg = GameConfig(k=4, deterministic=True)
    a = run_game(init_game(graph, cfg), cfg)
    b = run_game(init_game(graph, cfg), cfg)
    assert a.c2p.tolist() == b.c2p.tolist()


def test_round_cap_respected(rng):
    graph = random_cluster_graph(rng, max_clusters=16)
    cfg = GameConfig(k=4, max_rounds=1, deterministic=True)
    state = run_game(init_game(graph, cfg), cfg)
    assert state.round == 1


def test_part_size_consistent_after_game(rng):
    for _ in range(5):
        graph = random_cluster_graph(rng, max_clusters=15)
        cfg = GameConfig(k=3, deterministic=True)
        state = run_game(init_game(graph, cfg), cfg)
        expected = np.bincount(state.c2p, weights=graph.size.astype(float),
                               minlength=3).astype(int)
        assert state.part_size.tolist() == expected.tolist()
