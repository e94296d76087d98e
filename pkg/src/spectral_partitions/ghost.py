from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.linalg

from .graph_core import Edge, Partition, SpectralPartitionError
from .signed import partition_laplacian


logger = logging.getLogger(__name__)


DEFAULT_IDENTITY_TOL = 1e-13


class MismatchAt(SpectralPartitionError):
    def __init__(self, *, i: int, j: int, expected: float, found: float):
        super().__init__(f"reduced ghost operator differs at ({i},{j}): expected {expected!r}, found {found!r}")
        self.i = i
        self.j = j
        self.expected = expected
        self.found = found


@dataclass(frozen=True)
class GhostPair:
    edge: Edge
    weight: float
    k: int
    l: int


@dataclass(frozen=True)
class GhostGraph:
    """G with every boundary edge (i, j) replaced by pendant ghosts k (on i) and l (on j).

    Ghost vertices are numbered after V in boundary order: k = |V| + 2b, l = |V| + 2b + 1.
    """

    partition: Partition
    vertex_count: int
    edges: tuple[tuple[int, int, float], ...]
    ghosts: tuple[GhostPair, ...]

    @property
    def base_count(self) -> int:
        return self.partition.graph.vertex_count

    @cached_property
    def degrees(self) -> tuple[int, ...]:
        counts = [0] * self.vertex_count
        for a, b, _ in self.edges:
            counts[a] += 1
            counts[b] += 1
        return tuple(counts)


def build_ghost(partition: Partition) -> GhostGraph:
    graph = partition.graph
    n = graph.vertex_count
    edges = [(i, j, w) for i, j, w in graph.edges if (i, j) not in partition.boundary_set]
    ghosts: list[GhostPair] = []
    for b, (i, j) in enumerate(partition.boundary):
        w = graph.weight(i, j)
        pair = GhostPair(edge=(i, j), weight=w, k=n + 2 * b, l=n + 2 * b + 1)
        ghosts.append(pair)
        edges.append((i, pair.k, 2.0 * w))
        edges.append((j, pair.l, 2.0 * w))
    return GhostGraph(
        partition=partition,
        vertex_count=n + 2 * len(ghosts),
        edges=tuple(edges),
        ghosts=tuple(ghosts),
    )


def anticontinuous_extension(ghost: GhostGraph, u: np.ndarray) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    extended = np.zeros(ghost.vertex_count)
    extended[: ghost.base_count] = u
    for pair in ghost.ghosts:
        i, j = pair.edge
        extended[pair.k] = (u[i] - u[j]) / 2.0
        extended[pair.l] = (u[j] - u[i]) / 2.0
    return extended


def extension_matrix(ghost: GhostGraph) -> np.ndarray:
    """T as a |V′| × |V| matrix."""
    return np.column_stack([anticontinuous_extension(ghost, e) for e in np.eye(ghost.base_count)])


def restriction_matrix(ghost: GhostGraph) -> np.ndarray:
    """R = [I 0]."""
    return np.eye(ghost.base_count, ghost.vertex_count)


def ghost_operator(ghost: GhostGraph) -> np.ndarray:
    """L^∂P(G′): Laplacian rows on V, boundary-condition rows on the ghosts."""
    size = ghost.vertex_count
    operator = np.zeros((size, size))
    for a, b, w in ghost.edges:
        if a >= ghost.base_count and b >= ghost.base_count:
            continue
        for row, col in ((a, b), (b, a)):
            if row < ghost.base_count:
                operator[row, row] += w
                operator[row, col] -= w
    for pair in ghost.ghosts:
        i, j = pair.edge
        # u_k + u_l
        operator[pair.k, pair.k] = 1.0
        operator[pair.k, pair.l] = 1.0
        # u_k − u_i + u_j − u_l
        operator[pair.l, pair.k] = 1.0
        operator[pair.l, i] = -1.0
        operator[pair.l, j] = 1.0
        operator[pair.l, pair.l] = -1.0
    return operator


def reduced_operator(ghost: GhostGraph) -> np.ndarray:
    return restriction_matrix(ghost) @ ghost_operator(ghost) @ extension_matrix(ghost)


def verify_discretization(partition: Partition, *, tol: float = DEFAULT_IDENTITY_TOL) -> bool:
    """Check R·L^∂P(G′)·T against the partition Laplacian entry by entry.

    The ghost rows of L^∂P(G′)·T must vanish as well, since T produces
    anticontinuous vectors.
    """
    ghost = build_ghost(partition)
    full = ghost_operator(ghost) @ extension_matrix(ghost)
    reduced = full[: ghost.base_count]
    expected = partition_laplacian(partition)
    scale = max(1.0, float(np.abs(expected).max()))
    diff = np.abs(reduced - expected)
    if diff.size and diff.max() > tol * scale:
        i, j = np.unravel_index(int(np.argmax(diff)), diff.shape)
        raise MismatchAt(i=int(i), j=int(j), expected=float(expected[i, j]), found=float(reduced[i, j]))
    ghost_rows = full[ghost.base_count :]
    if ghost_rows.size and np.abs(ghost_rows).max() > tol * scale:
        row, col = np.unravel_index(int(np.argmax(np.abs(ghost_rows))), ghost_rows.shape)
        raise MismatchAt(i=int(row) + ghost.base_count, j=int(col), expected=0.0, found=float(ghost_rows[row, col]))
    logger.debug("ghost discretization verified vertices=%s ghosts=%s", ghost.base_count, len(ghost.ghosts))
    return True


def pullback_spectrum(partition: Partition) -> np.ndarray:
    """Eigenvalues of the ghost operator restricted to anticontinuous vectors."""
    reduced = reduced_operator(build_ghost(partition))
    return scipy.linalg.eigvalsh(0.5 * (reduced + reduced.T))
