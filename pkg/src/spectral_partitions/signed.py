from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

import networkx as nx
import numpy as np

from .graph_core import Edge, Partition, SpectralPartitionError, WeightedGraph, canonical_edge


logger = logging.getLogger(__name__)


class NotAClosedWalk(SpectralPartitionError):
    def __init__(self, *, walk: Sequence[int], reason: str):
        super().__init__(f"walk {list(walk)} is not a closed edge walk: {reason}")
        self.walk = tuple(walk)
        self.reason = reason


class UnknownEdge(SpectralPartitionError):
    def __init__(self, *, edge: Edge):
        super().__init__(f"edge {edge} is not an edge of the graph")
        self.edge = edge


@dataclass(frozen=True)
class Signature:
    """Edge signature stored as its negative edge set."""

    graph: WeightedGraph
    negative_edges: frozenset[Edge]

    def sigma(self, i: int, j: int) -> int:
        return -1 if canonical_edge(i, j) in self.negative_edges else 1

    @cached_property
    def signs(self) -> np.ndarray:
        """±1 per edge, in the graph's canonical edge order."""
        return np.array([-1.0 if key in self.negative_edges else 1.0 for key in self.graph.edge_keys])

    def sorted_edges(self) -> list[Edge]:
        return sorted(self.negative_edges)


@dataclass(frozen=True)
class SwitchingFunction:
    values: tuple[int, ...]

    @cached_property
    def vector(self) -> np.ndarray:
        return np.array(self.values, dtype=float)


def make_signature(graph: WeightedGraph, negative_edges: Iterable[Sequence[int]]) -> Signature:
    gamma: set[Edge] = set()
    for raw in negative_edges:
        key = canonical_edge(int(raw[0]), int(raw[1]))
        if key not in graph.edge_index:
            raise UnknownEdge(edge=key)
        gamma.add(key)
    return Signature(graph=graph, negative_edges=frozenset(gamma))


def all_positive(graph: WeightedGraph) -> Signature:
    return Signature(graph=graph, negative_edges=frozenset())


def all_negative(graph: WeightedGraph) -> Signature:
    return Signature(graph=graph, negative_edges=frozenset(graph.edge_keys))


def boundary_signature(partition: Partition) -> Signature:
    return Signature(graph=partition.graph, negative_edges=partition.boundary_set)


def make_switching(values: Sequence[int]) -> SwitchingFunction:
    cleaned = tuple(int(v) for v in values)
    for v in cleaned:
        if v not in (-1, 1):
            raise ValueError(f"switching function values must be +1 or -1, got {v}")
    return SwitchingFunction(values=cleaned)


def symmetric_difference(first: Signature, second: Signature) -> Signature:
    return Signature(graph=first.graph, negative_edges=first.negative_edges ^ second.negative_edges)


def switch(signature: Signature, tau: SwitchingFunction) -> Signature:
    t = tau.values
    if len(t) != signature.graph.vertex_count:
        raise ValueError(f"switching function has {len(t)} entries, graph has {signature.graph.vertex_count} vertices")
    flipped = frozenset(
        key for key in signature.graph.edge_keys if t[key[0]] * signature.sigma(*key) * t[key[1]] < 0
    )
    return Signature(graph=signature.graph, negative_edges=flipped)


def cycle_sign(signature: Signature, cycle: Sequence[int]) -> int:
    """Product of edge signs along a closed walk given as its vertex sequence v0, v1, ..., v0."""
    if len(cycle) < 3:
        raise NotAClosedWalk(walk=cycle, reason="fewer than two steps")
    if cycle[0] != cycle[-1]:
        raise NotAClosedWalk(walk=cycle, reason="first and last vertex differ")
    sign = 1
    for a, b in zip(cycle, cycle[1:]):
        if not signature.graph.has_edge(a, b):
            raise NotAClosedWalk(walk=cycle, reason=f"({a},{b}) is not an edge")
        sign *= signature.sigma(a, b)
    return sign


def bfs_tree(graph: WeightedGraph) -> tuple[list[int], list[int]]:
    parent = [-1] * graph.vertex_count
    order = [0]
    seen = {0}
    queue = deque([0])
    while queue:
        u = queue.popleft()
        for v in graph.adjacency[u]:
            if v not in seen:
                seen.add(v)
                parent[v] = u
                order.append(v)
                queue.append(v)
    return parent, order


def spanning_tree_edges(graph: WeightedGraph) -> frozenset[Edge]:
    parent, _ = bfs_tree(graph)
    return frozenset(canonical_edge(v, p) for v, p in enumerate(parent) if p >= 0)


def fundamental_cycles(graph: WeightedGraph) -> list[list[int]]:
    """One closed vertex walk per non-tree edge of the BFS spanning tree rooted at 0."""
    parent, _ = bfs_tree(graph)
    tree = spanning_tree_edges(graph)

    def _path_to_root(v: int) -> list[int]:
        path = [v]
        while parent[path[-1]] >= 0:
            path.append(parent[path[-1]])
        return path

    cycles: list[list[int]] = []
    for i, j in graph.edge_keys:
        if (i, j) in tree:
            continue
        up_i, up_j = _path_to_root(i), _path_to_root(j)
        on_j = set(up_j)
        meet = next(v for v in up_i if v in on_j)
        left = up_i[: up_i.index(meet) + 1]
        right = up_j[: up_j.index(meet)]
        # i -> ... -> meet -> ... -> j -> i
        cycles.append(left + right[::-1] + [i])
    return cycles


def is_balanced(signature: Signature) -> SwitchingFunction | None:
    """Return τ with σ^τ ≡ +1 if one exists.

    Signs are propagated along a BFS tree from vertex 0 (τ_0 = +1), then every
    edge is checked; a failing edge closes a negative fundamental cycle.
    """
    graph = signature.graph
    parent, order = bfs_tree(graph)
    tau = [1] * graph.vertex_count
    for v in order[1:]:
        p = parent[v]
        tau[v] = tau[p] * signature.sigma(p, v)
    for i, j in graph.edge_keys:
        if tau[i] * signature.sigma(i, j) * tau[j] < 0:
            logger.debug("signature unbalanced witness_edge=%s", (i, j))
            return None
    return SwitchingFunction(values=tuple(tau))


def switching_equivalent(first: Signature, second: Signature) -> SwitchingFunction | None:
    if first.graph != second.graph:
        raise ValueError("signatures live on different graphs")
    return is_balanced(symmetric_difference(first, second))


def signed_laplacian(graph: WeightedGraph, signature: Signature) -> np.ndarray:
    n = graph.vertex_count
    matrix = np.zeros((n, n))
    for (i, j, w), s in zip(graph.edges, signature.signs):
        matrix[i, i] += w
        matrix[j, j] += w
        matrix[i, j] = -s * w
        matrix[j, i] = -s * w
    return matrix


def plain_laplacian(graph: WeightedGraph) -> np.ndarray:
    return nx.laplacian_matrix(graph.to_networkx(), nodelist=range(graph.vertex_count)).toarray().astype(float)


def partition_laplacian(partition: Partition) -> np.ndarray:
    return signed_laplacian(partition.graph, boundary_signature(partition))


def conjugate_by_switching(operator: np.ndarray, tau: SwitchingFunction) -> np.ndarray:
    t = tau.vector
    return t[:, None] * operator * t[None, :]


def quadratic_form(signature: Signature, u: np.ndarray) -> float:
    """Σ w_ij (u_i − σ_ij u_j)² summed edge by edge."""
    graph = signature.graph
    total = 0.0
    for (i, j, w), s in zip(graph.edges, signature.signs):
        total += w * (u[i] - s * u[j]) ** 2
    return float(total)
