from __future__ import annotations

import networkx as nx
import pytest
from hypothesis import given, seed, settings
from hypothesis import strategies as st

from spectral_partitions.graph_core import (
    CapExceeded,
    Disconnected,
    DisconnectedComponent,
    DuplicateEdge,
    EmptyComponent,
    EmptyEdgeList,
    InvalidVertex,
    NonPositiveWeight,
    SelfLoop,
    betti_number,
    build_graph,
    enumerate_partitions,
    is_bipartite_partition,
    is_tree_partition,
    make_partition,
    partition_multigraph,
)
from spectral_partitions.instances import SplitMix64, complete, cycle, path, random_small_graph, triangle


SEEDS = st.integers(min_value=0, max_value=2**64 - 1)


def test_build_graph_canonicalizes_and_sorts_edges():
    graph = build_graph(3, [(2, 1, 2.0), (1, 0, 1.0)])
    assert graph.edges == ((0, 1, 1.0), (1, 2, 2.0))
    assert graph.weight(2, 1) == 2.0
    assert graph.has_edge(1, 0)
    assert not graph.has_edge(0, 2)
    assert graph.adjacency == ((1,), (0, 2), (1,))


@pytest.mark.parametrize(
    ("vertices", "edges", "error"),
    [
        (3, [], EmptyEdgeList),
        (2, [(0, 2, 1.0)], InvalidVertex),
        (2, [(-1, 1, 1.0)], InvalidVertex),
        (2, [(1, 1, 1.0)], SelfLoop),
        (2, [(0, 1, 1.0), (1, 0, 2.0)], DuplicateEdge),
        (2, [(0, 1, 0.0)], NonPositiveWeight),
        (2, [(0, 1, -3.0)], NonPositiveWeight),
        (2, [(0, 1, float("nan"))], NonPositiveWeight),
        (4, [(0, 1, 1.0), (2, 3, 1.0)], Disconnected),
    ],
)
def test_build_graph_rejects_invalid_input(vertices, edges, error):
    with pytest.raises(error):
        build_graph(vertices, edges)


def test_disconnected_reports_component_count():
    with pytest.raises(Disconnected) as info:
        build_graph(5, [(0, 1, 1.0), (2, 3, 1.0)])
    assert info.value.component_count == 3


def test_make_partition_relabels_by_first_occurrence():
    partition = make_partition(path([1.0, 1.0, 1.0]), [2, 2, 0, 1])
    assert partition.labels == (0, 0, 1, 2)
    assert partition.nu == 3
    assert partition.components == ((0, 1), (2,), (3,))
    assert partition.boundary == ((1, 2), (2, 3))


def test_make_partition_rejects_label_gaps_and_disconnected_components():
    graph = path([1.0, 1.0, 1.0])
    with pytest.raises(EmptyComponent) as gap:
        make_partition(graph, [0, 2, 2, 0])
    assert gap.value.label == 1
    with pytest.raises(DisconnectedComponent) as split:
        make_partition(graph, [0, 1, 0, 1])
    assert split.value.label == 0
    with pytest.raises(ValueError):
        make_partition(graph, [0, 0, 1])


def test_triangle_singletons_multigraph_is_a_triangle(singletons):
    multigraph = partition_multigraph(singletons)
    assert multigraph.node_count == 3
    assert len(multigraph.edges) == 3
    assert betti_number(singletons) == 1
    assert not is_tree_partition(singletons)
    assert not is_bipartite_partition(singletons)


def test_three_component_example(three_component):
    assert len(three_component.boundary) == 4
    assert three_component.nu == 3
    assert betti_number(three_component) == 2
    assert not is_bipartite_partition(three_component)
    assert not is_tree_partition(three_component)


def test_parallel_boundary_edges_make_a_multigraph_cycle():
    graph = cycle(4)
    partition = make_partition(graph, [0, 0, 1, 1])
    assert len(partition.boundary) == 2
    assert betti_number(partition) == 1
    assert is_bipartite_partition(partition)
    assert not is_tree_partition(partition)


def test_single_component_is_a_tree_partition():
    partition = make_partition(triangle(), [0, 0, 0])
    assert partition.boundary == ()
    assert betti_number(partition) == 0
    assert is_tree_partition(partition)


@pytest.mark.parametrize(
    ("graph", "nu", "count"),
    [
        (triangle(), 2, 3),
        (triangle(), 3, 1),
        (path([1.0, 1.0]), 2, 2),
        (cycle(4), 2, 6),
        (complete(4), 2, 7),
    ],
)
def test_enumerate_partitions_counts(graph, nu, count):
    assert len(list(enumerate_partitions(graph, nu))) == count


def test_enumerate_partitions_respects_vertex_cap():
    with pytest.raises(CapExceeded) as info:
        list(enumerate_partitions(path([1.0] * 5), 2, vertex_cap=4))
    assert (info.value.size, info.value.cap) == (6, 4)


@seed(11)
@settings(deadline=None, max_examples=30)
@given(SEEDS, st.integers(min_value=1, max_value=4))
def test_enumerated_partitions_are_distinct_connected_and_canonical(s, nu):
    graph = random_small_graph(SplitMix64(s), 3, 6)
    nx_graph = graph.to_networkx()
    seen = set()
    for partition in enumerate_partitions(graph, nu):
        assert partition.labels not in seen
        seen.add(partition.labels)
        assert partition.nu == nu
        assert make_partition(graph, partition.labels).labels == partition.labels
        for vertices in partition.components:
            assert nx.is_connected(nx_graph.subgraph(vertices))
