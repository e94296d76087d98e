from __future__ import annotations

import logging
from typing import Sequence, TypeVar

from .graph_core import Disconnected, Partition, WeightedGraph, build_graph, make_partition
from .signed import Signature, SwitchingFunction


logger = logging.getLogger(__name__)


MASK64 = (1 << 64) - 1
WEIGHT_RANGE = (0.5, 2.0)
MAX_REJECTIONS = 10_000

T = TypeVar("T")


class SplitMix64:
    """SplitMix64 generator; doubles take the top 53 bits of each output."""

    def __init__(self, seed: int):
        self.state = seed & MASK64

    def next_u64(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
        return z ^ (z >> 31)

    def random(self) -> float:
        return (self.next_u64() >> 11) * (1.0 / (1 << 53))

    def uniform(self, low: float, high: float) -> float:
        return low + (high - low) * self.random()

    def randint(self, low: int, high: int) -> int:
        """Uniform integer in [low, high]."""
        span = high - low + 1
        if span <= 0:
            raise ValueError(f"empty range [{low}, {high}]")
        return low + self.next_u64() % span

    def choice(self, items: Sequence[T]) -> T:
        return items[self.randint(0, len(items) - 1)]

    def spawn(self) -> "SplitMix64":
        return SplitMix64(self.next_u64())


def random_graph(rng: SplitMix64, vertex_count: int, edge_probability: float = 0.5) -> WeightedGraph:
    """Erdős–Rényi G(n, p) with weights in [0.5, 2.0], redrawn until connected."""
    if vertex_count < 2:
        raise ValueError("random graphs need at least 2 vertices")
    low, high = WEIGHT_RANGE
    for attempt in range(MAX_REJECTIONS):
        edges = []
        for i in range(vertex_count):
            for j in range(i + 1, vertex_count):
                if rng.random() < edge_probability:
                    edges.append((i, j, rng.uniform(low, high)))
        if not edges:
            continue
        try:
            graph = build_graph(vertex_count, edges)
        except Disconnected:
            continue
        if attempt:
            logger.debug("random graph rejections=%s vertex_count=%s", attempt, vertex_count)
        return graph
    raise RuntimeError(f"no connected G({vertex_count}, {edge_probability}) after {MAX_REJECTIONS} draws")


def random_small_graph(rng: SplitMix64, min_vertices: int = 3, max_vertices: int = 8) -> WeightedGraph:
    n = rng.randint(min_vertices, max_vertices)
    return random_graph(rng, n, rng.uniform(0.35, 0.8))


def random_tree(rng: SplitMix64, vertex_count: int) -> WeightedGraph:
    """Random recursive tree: vertex v attaches to a uniform earlier vertex."""
    if vertex_count < 2:
        raise ValueError("random trees need at least 2 vertices")
    low, high = WEIGHT_RANGE
    edges = [(rng.randint(0, v - 1), v, rng.uniform(low, high)) for v in range(1, vertex_count)]
    return build_graph(vertex_count, edges)


def random_signature(rng: SplitMix64, graph: WeightedGraph, negative_probability: float = 0.5) -> Signature:
    return Signature(
        graph=graph,
        negative_edges=frozenset(key for key in graph.edge_keys if rng.random() < negative_probability),
    )


def random_switching(rng: SplitMix64, vertex_count: int) -> SwitchingFunction:
    return SwitchingFunction(values=tuple(1 if rng.random() < 0.5 else -1 for _ in range(vertex_count)))


def random_partition(rng: SplitMix64, graph: WeightedGraph, nu: int) -> Partition:
    """Connected ν-partition grown from ν random seeds, one frontier vertex at a time."""
    n = graph.vertex_count
    if not 1 <= nu <= n:
        raise ValueError(f"nu={nu} outside 1..{n}")
    labels = [-1] * n
    seeds: list[int] = []
    while len(seeds) < nu:
        v = rng.randint(0, n - 1)
        if v not in seeds:
            seeds.append(v)
    for label, v in enumerate(seeds):
        labels[v] = label
    while any(label < 0 for label in labels):
        frontier = [
            (v, labels[u]) for v in range(n) if labels[v] < 0 for u in graph.adjacency[v] if labels[u] >= 0
        ]
        v, label = rng.choice(frontier)
        labels[v] = label
    return make_partition(graph, labels)


def triangle() -> WeightedGraph:
    return build_graph(3, [(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)])


def path(weights: Sequence[float]) -> WeightedGraph:
    return build_graph(len(weights) + 1, [(i, i + 1, float(w)) for i, w in enumerate(weights)])


def cycle(vertex_count: int, weights: Sequence[float] | None = None) -> WeightedGraph:
    ws = list(weights) if weights is not None else [1.0] * vertex_count
    return build_graph(vertex_count, [(i, (i + 1) % vertex_count, ws[i]) for i in range(vertex_count)])


def star(leaves: int) -> WeightedGraph:
    return build_graph(leaves + 1, [(0, k, 1.0) for k in range(1, leaves + 1)])


def complete(vertex_count: int) -> WeightedGraph:
    return build_graph(vertex_count, [(i, j, 1.0) for i in range(vertex_count) for j in range(i + 1, vertex_count)])


def three_component_example() -> tuple[WeightedGraph, Partition]:
    """Six vertices in three pairs; two boundary edges join the first two pairs, one each to the third."""
    graph = build_graph(
        6,
        [(0, 1, 1.0), (2, 3, 1.0), (4, 5, 1.0), (0, 2, 1.0), (1, 3, 1.0), (1, 4, 1.0), (3, 5, 1.0)],
    )
    return graph, make_partition(graph, [0, 0, 1, 1, 2, 2])
