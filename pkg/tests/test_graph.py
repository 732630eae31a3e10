import numpy as np
import pytest

from lib.errors import InputError
from lib.graph import Graph


def test_neighborhood_of_sets(path3):
    g, _ = path3
    assert g.neighborhood({1}) == {2}
    assert g.neighborhood({1, 3}) == {2}
    assert g.neighborhood({2}) == {1, 3}
    assert g.neighborhood(set()) == frozenset()


def test_neighborhood_may_intersect_the_set():
    triangle = Graph([1, 2, 3], [(1, 2), (2, 3), (1, 3)])
    assert triangle.neighborhood({1, 2}) == {1, 2, 3}


def test_edges_are_normalised():
    g = Graph([1, 2], [(2, 1)])
    assert g.edges == {(1, 2)}
    assert g.sorted_edges() == [(1, 2)]


@pytest.mark.parametrize(
    "nodes, edges",
    [
        ([1, 2], [(1, 2), (2, 1)]),
        ([1, 2], [(1, 1)]),
        ([1, 2], [(1, 3)]),
        ([1, 1, 2], [(1, 2)]),
        ([-1, 2], [(-1, 2)]),
    ],
)
def test_malformed_graphs_are_rejected(nodes, edges):
    with pytest.raises(InputError):
        Graph(nodes, edges)


def test_connectivity_requirement():
    with pytest.raises(InputError):
        Graph([1, 2, 3], [(1, 2)], require_connected=True)
    with pytest.raises(InputError):
        Graph([1], [], require_connected=True)
    assert Graph([1, 2], [(1, 2)], require_connected=True).is_connected()


def test_induced_subgraph_may_be_disconnected(path3):
    g, _ = path3
    sub = g.induced_subgraph({1, 3})
    assert sub.edges == frozenset()
    assert not sub.is_connected()
    assert sub.connected_components() == [frozenset({1}), frozenset({3})]


def test_induced_subgraph_of_empty_set_fails(path3):
    g, _ = path3
    with pytest.raises(InputError):
        g.induced_subgraph(set())


def test_independence(path3):
    g, _ = path3
    assert g.is_independent({1, 3})
    assert not g.is_independent({1, 2})
    assert g.is_independent(set())


def test_unknown_ids_are_input_errors(path3):
    g, _ = path3
    with pytest.raises(InputError):
        g.neighbors(9)
    with pytest.raises(InputError):
        g.neighborhood({1, 9})


def test_equality_and_membership():
    a = Graph([1, 2, 3], [(1, 2), (2, 3)])
    b = Graph([3, 2, 1], [(3, 2), (2, 1)])
    assert a == b
    assert hash(a) == hash(b)
    assert 2 in a and 4 not in a
    assert len(a) == 3
    assert a.degree(2) == 2


def test_components_of_a_graph_with_isolated_nodes():
    g = Graph([1, 2, 3, 4], [(1, 2)])
    assert g.connected_components() == [frozenset({1, 2}), frozenset({3}), frozenset({4})]


def _subsets(rng, nodes, count):
    return [frozenset(i for i in nodes if rng.random() < 0.5) for _ in range(count)]


@pytest.mark.parametrize("seed", range(5))
def test_neighborhood_is_a_union(random_instances, seed):
    rng = np.random.default_rng(seed)
    for g, _ in random_instances(20, n_max=9, seed=seed):
        for a, b in zip(_subsets(rng, g.node_ids, 10), _subsets(rng, g.node_ids, 10)):
            assert g.neighborhood(a | b) == g.neighborhood(a) | g.neighborhood(b)


@pytest.mark.parametrize("seed", range(5))
def test_induced_subgraphs_compose(random_instances, seed):
    rng = np.random.default_rng(seed)
    for g, _ in random_instances(20, n_max=9, seed=seed):
        for s in _subsets(rng, g.node_ids, 10):
            if not s:
                continue
            for t in _subsets(rng, sorted(s), 3):
                if t:
                    assert g.induced_subgraph(s).induced_subgraph(t) == g.induced_subgraph(t)


@pytest.mark.parametrize("seed", range(5))
def test_components_partition_the_nodes(random_instances, seed):
    rng = np.random.default_rng(seed)
    for g, _ in random_instances(20, n_max=9, p=0.1, seed=seed):
        for s in _subsets(rng, g.node_ids, 10):
            if not s:
                continue
            sub = g.induced_subgraph(s)
            components = sub.connected_components()
            assert sum(len(c) for c in components) == len(s)
            assert frozenset().union(*components) == s
            for c in components:
                assert sub.induced_subgraph(c).is_connected()
                assert not (sub.neighborhood(c) - c)


def test_is_independent_means_no_induced_edges(random_instances):
    rng = np.random.default_rng(7)
    for g, _ in random_instances(30, n_max=8, seed=7):
        for s in _subsets(rng, g.node_ids, 10):
            if s:
                assert g.is_independent(s) == (len(g.induced_subgraph(s).edges) == 0)
