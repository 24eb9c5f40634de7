import itertools

import numpy as np
import pytest
import scipy.linalg

from physnet import (
    build_graph,
    connected_components,
    graph_from_dict,
    incidence_matrix,
    kron_extend,
    spanning_trees_towards,
    strongly_connected_components,
)
from physnet.errors import GraphTooLargeForOracle, IndexOutOfRange, NonPositiveWeight, SelfLoop

from conftest import all_simple_digraphs, random_digraph, reachable


def test_smallest_graph():
    g = build_graph(2, [(1, 2, 1.0)])
    assert (g.n, g.m) == (2, 1)
    assert (g.tails, g.heads) == ((0,), (1,))


def test_three_cycle_and_default_weight():
    g = build_graph(3, [(1, 2), (2, 3), (3, 1)])
    assert g.weights == (1.0, 1.0, 1.0)
    assert g.m == 3


@pytest.mark.parametrize("n, edges, error", [
    (2, [(1, 1, 1.0)], SelfLoop),
    (2, [(1, 3, 1.0)], IndexOutOfRange),
    (2, [(0, 1, 1.0)], IndexOutOfRange),
    (2, [(1, 2, 0.0)], NonPositiveWeight),
    (2, [(1, 2, -1.0)], NonPositiveWeight),
    (0, [], IndexOutOfRange),
])
def test_build_graph_rejects(n, edges, error):
    with pytest.raises(error):
        build_graph(n, edges)


def test_parallel_edges_allowed():
    g = build_graph(2, [(1, 2, 1.0), (1, 2, 2.0)])
    assert g.m == 2


def test_json_roundtrip():
    g = build_graph(3, [(1, 2, 0.5), (3, 2, 2.0)])
    assert graph_from_dict(g.to_dict()) == g
    assert graph_from_dict({"n": 2, "edges": [{"tail": 1, "head": 2}]}).weights == (1.0,)


def test_incidence_single_edge():
    D = incidence_matrix(build_graph(2, [(1, 2)]))
    np.testing.assert_array_equal(D, [[-1], [1]])


def test_incidence_three_cycle():
    D = incidence_matrix(build_graph(3, [(1, 2), (2, 3), (3, 1)]))
    np.testing.assert_array_equal(D, [[-1, 0, 1], [1, -1, 0], [0, 1, -1]])


def test_incidence_column_sums_exact(rng):
    for _ in range(50):
        g = random_digraph(rng, int(rng.integers(2, 8)), int(rng.integers(0, 12)))
        D = incidence_matrix(g)
        assert D.dtype.kind == "i"
        assert not D.sum(axis=0).any()
        assert ((D == -1).sum(axis=0) == 1).all() and ((D == 1).sum(axis=0) == 1).all()


def _rank_pivoted(D):
    if D.size == 0:
        return 0
    _, R, _ = scipy.linalg.qr(D.astype(float), pivoting=True)
    diag = np.abs(np.diag(R))
    return int((diag > 1e-10 * max(1.0, diag.max(initial=0.0))).sum())


def test_weak_components_examples():
    assert connected_components(build_graph(3, [(1, 2), (2, 3), (3, 1)])) == [[0, 1, 2]]
    assert connected_components(build_graph(4, [(1, 2), (3, 4)])) == [[0, 1], [2, 3]]


def test_component_count_matches_rank_deficiency_exhaustive():
    for n in range(1, 5):
        for g in all_simple_digraphs(n, min(6, n * (n - 1))):
            assert len(connected_components(g)) == n - _rank_pivoted(incidence_matrix(g))


def test_component_count_matches_rank_deficiency_n5(rng):
    for _ in range(300):
        g = random_digraph(rng, 5, int(rng.integers(0, 7)))
        assert len(connected_components(g)) == 5 - _rank_pivoted(incidence_matrix(g))


def test_scc_examples():
    assert strongly_connected_components(build_graph(3, [(1, 2), (2, 3), (3, 1)])) == [[0, 1, 2]]
    assert strongly_connected_components(build_graph(3, [(1, 2), (2, 3)])) == [[0], [1], [2]]
    g = build_graph(3, [(1, 2), (2, 1), (3, 1)])
    assert strongly_connected_components(g) == [[0, 1], [2]]


def test_scc_matches_pairwise_reachability(rng):
    for _ in range(200):
        n = int(rng.integers(1, 7))
        g = random_digraph(rng, n, int(rng.integers(0, 10)) if n > 1 else 0)
        reach = [reachable(g, v) for v in range(g.n)]
        expected = []
        for v in range(g.n):
            comp = sorted(u for u in range(g.n) if u in reach[v] and v in reach[u])
            if comp not in expected:
                expected.append(comp)
        assert strongly_connected_components(g) == sorted(expected, key=lambda c: c[0])


def test_trees_single_edge():
    g = build_graph(2, [(1, 2)])
    assert spanning_trees_towards(g, 1) == [frozenset({0})]
    assert spanning_trees_towards(g, 0) == []


def test_trees_three_cycle():
    g = build_graph(3, [(1, 2, 2.0), (2, 3, 3.0), (3, 1, 5.0)])
    trees = spanning_trees_towards(g, 0)
    # towards vertex 1: edges 2->3 and 3->1
    assert trees == [frozenset({1, 2})]


def test_trees_are_valid_in_trees(rng):
    for _ in range(50):
        g = random_digraph(rng, int(rng.integers(2, 6)), int(rng.integers(1, 9)))
        for v in range(g.n):
            for tree in spanning_trees_towards(g, v):
                assert len(tree) == g.n - 1
                tails = [g.tails[j] for j in tree]
                assert sorted(tails) == [u for u in range(g.n) if u != v]
                succ = {g.tails[j]: g.heads[j] for j in tree}
                for u in range(g.n):
                    for _ in range(g.n):
                        if u == v:
                            break
                        u = succ[u]
                    assert u == v


def test_trees_exist_everywhere_iff_strongly_connected():
    for n in range(1, 5):
        for g in all_simple_digraphs(n, min(6, n * (n - 1))):
            every = all(spanning_trees_towards(g, v) for v in range(n))
            assert every == (len(strongly_connected_components(g)) == 1)


def test_trees_n5_sample(rng):
    for _ in range(150):
        g = random_digraph(rng, 5, int(rng.integers(4, 9)))
        every = all(spanning_trees_towards(g, v) for v in range(5))
        assert every == (len(strongly_connected_components(g)) == 1)


def test_oracle_size_limit():
    g = build_graph(9, [(i, i + 1) for i in range(1, 9)])
    with pytest.raises(GraphTooLargeForOracle):
        spanning_trees_towards(g, 0)


def test_kron_extend():
    D = incidence_matrix(build_graph(2, [(1, 2)]))
    np.testing.assert_array_equal(kron_extend(D, 1), D)
    np.testing.assert_array_equal(kron_extend(D, 2), [[-1, 0], [0, -1], [1, 0], [0, 1]])


@pytest.mark.parametrize("d", [1, 2, 3])
def test_kron_extend_annihilated_by_stacked_ones(rng, d):
    g = random_digraph(rng, 5, 7)
    Dd = kron_extend(incidence_matrix(g), d)
    ones = np.kron(np.ones((g.n, 1)), np.eye(d))
    assert not (ones.T @ Dd).any()
