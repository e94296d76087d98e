from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Iterator, Sequence

import networkx as nx
import numpy as np


logger = logging.getLogger(__name__)


DEFAULT_VERTEX_CAP = 12

Edge = tuple[int, int]


class SpectralPartitionError(RuntimeError):
    pass


class EmptyEdgeList(SpectralPartitionError):
    pass


class InvalidVertex(SpectralPartitionError):
    def __init__(self, *, vertex: int, vertex_count: int):
        super().__init__(f"vertex {vertex} outside 0..{vertex_count - 1}")
        self.vertex = vertex
        self.vertex_count = vertex_count


class DuplicateEdge(SpectralPartitionError):
    def __init__(self, *, edge: Edge):
        super().__init__(f"edge {edge} listed more than once")
        self.edge = edge


class SelfLoop(SpectralPartitionError):
    def __init__(self, *, vertex: int):
        super().__init__(f"self-loop at vertex {vertex}")
        self.vertex = vertex


class NonPositiveWeight(SpectralPartitionError):
    def __init__(self, *, edge: Edge, weight: float):
        super().__init__(f"edge {edge} has non-positive weight {weight!r}")
        self.edge = edge
        self.weight = weight


class Disconnected(SpectralPartitionError):
    def __init__(self, *, component_count: int):
        super().__init__(f"graph has {component_count} connected components")
        self.component_count = component_count


class DisconnectedComponent(SpectralPartitionError):
    def __init__(self, *, label: int):
        super().__init__(f"component {label} does not induce a connected subgraph")
        self.label = label


class EmptyComponent(SpectralPartitionError):
    def __init__(self, *, label: int):
        super().__init__(f"component label {label} has no vertices")
        self.label = label


class CapExceeded(SpectralPartitionError):
    def __init__(self, *, what: str, size: int, cap: int):
        super().__init__(f"{what}={size} exceeds cap {cap}")
        self.what = what
        self.size = size
        self.cap = cap


def canonical_edge(i: int, j: int) -> Edge:
    return (i, j) if i < j else (j, i)


@dataclass(frozen=True)
class WeightedGraph:
    """Finite simple connected graph with positive weights; edges sorted, stored with i < j."""

    vertex_count: int
    edges: tuple[tuple[int, int, float], ...]

    @cached_property
    def edge_keys(self) -> tuple[Edge, ...]:
        return tuple((i, j) for i, j, _ in self.edges)

    @cached_property
    def edge_index(self) -> dict[Edge, int]:
        return {key: idx for idx, key in enumerate(self.edge_keys)}

    @cached_property
    def weights(self) -> np.ndarray:
        return np.array([w for _, _, w in self.edges], dtype=float)

    @cached_property
    def adjacency(self) -> tuple[tuple[int, ...], ...]:
        neighbours: list[list[int]] = [[] for _ in range(self.vertex_count)]
        for i, j, _ in self.edges:
            neighbours[i].append(j)
            neighbours[j].append(i)
        return tuple(tuple(sorted(n)) for n in neighbours)

    def has_edge(self, i: int, j: int) -> bool:
        return canonical_edge(i, j) in self.edge_index

    def weight(self, i: int, j: int) -> float:
        return self.edges[self.edge_index[canonical_edge(i, j)]][2]

    def to_networkx(self) -> nx.Graph:
        graph = nx.Graph()
        graph.add_nodes_from(range(self.vertex_count))
        graph.add_weighted_edges_from(self.edges)
        return graph

    def with_weights(self, weights: Sequence[float]) -> "WeightedGraph":
        return build_graph(self.vertex_count, [(i, j, float(w)) for (i, j), w in zip(self.edge_keys, weights)])


def build_graph(vertex_count: int, edge_list: Iterable[Sequence[float]]) -> WeightedGraph:
    if vertex_count <= 0:
        raise InvalidVertex(vertex=vertex_count, vertex_count=max(vertex_count, 0))
    canonical: dict[Edge, float] = {}
    for raw in edge_list:
        i, j, w = int(raw[0]), int(raw[1]), float(raw[2])
        for vertex in (i, j):
            if vertex < 0 or vertex >= vertex_count:
                raise InvalidVertex(vertex=vertex, vertex_count=vertex_count)
        if i == j:
            raise SelfLoop(vertex=i)
        key = canonical_edge(i, j)
        if key in canonical:
            raise DuplicateEdge(edge=key)
        if not np.isfinite(w) or w <= 0:
            raise NonPositiveWeight(edge=key, weight=w)
        canonical[key] = w
    if not canonical:
        raise EmptyEdgeList("edge list is empty")

    graph = WeightedGraph(
        vertex_count=vertex_count,
        edges=tuple((i, j, canonical[(i, j)]) for i, j in sorted(canonical)),
    )
    component_count = nx.number_connected_components(graph.to_networkx())
    if component_count != 1:
        raise Disconnected(component_count=component_count)
    return graph


def canonical_labels(labels: Sequence[int]) -> tuple[int, ...]:
    """Relabel components by order of first occurrence."""
    mapping: dict[int, int] = {}
    result: list[int] = []
    for label in labels:
        if label not in mapping:
            mapping[label] = len(mapping)
        result.append(mapping[label])
    return tuple(result)


@dataclass(frozen=True)
class Partition:
    graph: WeightedGraph
    labels: tuple[int, ...]

    @cached_property
    def nu(self) -> int:
        return max(self.labels) + 1

    @cached_property
    def components(self) -> tuple[tuple[int, ...], ...]:
        groups: list[list[int]] = [[] for _ in range(self.nu)]
        for vertex, label in enumerate(self.labels):
            groups[label].append(vertex)
        return tuple(tuple(group) for group in groups)

    @cached_property
    def boundary(self) -> tuple[Edge, ...]:
        return tuple((i, j) for i, j in self.graph.edge_keys if self.labels[i] != self.labels[j])

    @cached_property
    def boundary_set(self) -> frozenset[Edge]:
        return frozenset(self.boundary)

    @cached_property
    def boundary_index(self) -> dict[Edge, int]:
        return {edge: idx for idx, edge in enumerate(self.boundary)}

    def internal_edges(self, k: int) -> tuple[Edge, ...]:
        return tuple((i, j) for i, j in self.graph.edge_keys if self.labels[i] == k and self.labels[j] == k)

    def component_of(self, vertex: int) -> int:
        return self.labels[vertex]


def make_partition(graph: WeightedGraph, labels: Sequence[int]) -> Partition:
    if len(labels) != graph.vertex_count:
        raise ValueError(f"expected {graph.vertex_count} labels, got {len(labels)}")
    raw = [int(label) for label in labels]
    used = set(raw)
    if min(used) < 0:
        raise EmptyComponent(label=min(used))
    for label in range(max(used) + 1):
        if label not in used:
            raise EmptyComponent(label=label)

    partition = Partition(graph=graph, labels=canonical_labels(raw))
    nx_graph = graph.to_networkx()
    for vertices in partition.components:
        if not nx.is_connected(nx_graph.subgraph(vertices)):
            raise DisconnectedComponent(label=raw[vertices[0]])
    return partition


@dataclass(frozen=True)
class PartitionMultigraph:
    node_count: int
    edges: tuple[tuple[int, int, Edge], ...]
    vertex_component: tuple[int, ...]

    def to_networkx(self) -> nx.MultiGraph:
        graph = nx.MultiGraph()
        graph.add_nodes_from(range(self.node_count))
        for k, l, source in self.edges:
            graph.add_edge(k, l, source=source)
        return graph


def partition_multigraph(partition: Partition) -> PartitionMultigraph:
    labels = partition.labels
    return PartitionMultigraph(
        node_count=partition.nu,
        edges=tuple((labels[i], labels[j], (i, j)) for i, j in partition.boundary),
        vertex_component=labels,
    )


def betti_number(partition: Partition) -> int:
    return len(partition.boundary) - (partition.nu - 1)


def is_bipartite_partition(partition: Partition) -> bool:
    return nx.is_bipartite(partition_multigraph(partition).to_networkx())


def is_tree_partition(partition: Partition) -> bool:
    return nx.is_tree(partition_multigraph(partition).to_networkx())


def _restricted_growth_strings(n: int, blocks: int) -> Iterator[list[int]]:
    labels = [0] * n

    def _extend(position: int, used: int) -> Iterator[list[int]]:
        if position == n:
            if used == blocks:
                yield labels
            return
        # every unopened block still needs at least one of the remaining vertices
        if blocks - used > n - position:
            return
        for label in range(min(used + 1, blocks)):
            labels[position] = label
            yield from _extend(position + 1, max(used, label + 1))

    if n >= 1 and 1 <= blocks <= n:
        labels[0] = 0
        yield from _extend(1, 1)


def enumerate_partitions(graph: WeightedGraph, nu: int, *, vertex_cap: int = DEFAULT_VERTEX_CAP) -> Iterator[Partition]:
    if graph.vertex_count > vertex_cap:
        raise CapExceeded(what="vertex_count", size=graph.vertex_count, cap=vertex_cap)
    nx_graph = graph.to_networkx()
    produced = 0
    for labels in _restricted_growth_strings(graph.vertex_count, nu):
        partition = Partition(graph=graph, labels=tuple(labels))
        if all(nx.is_connected(nx_graph.subgraph(vertices)) for vertices in partition.components):
            produced += 1
            yield partition
    logger.debug("partitions enumerated vertex_count=%s nu=%s count=%s", graph.vertex_count, nu, produced)
