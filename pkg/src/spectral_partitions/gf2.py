"""GF(2) linear algebra on int bitsets and the edge chain space of a graph."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

from .graph_core import Edge, WeightedGraph, canonical_edge
from .signed import bfs_tree, fundamental_cycles


logger = logging.getLogger(__name__)


def parity(vec: int) -> int:
    return vec.bit_count() & 1


def pairing(first: int, second: int) -> int:
    """The form t(e_i, e_j) = δ_ij extended bilinearly."""
    return parity(first & second)


def row_reduce(rows: Iterable[int]) -> dict[int, int]:
    """Reduced basis of the row span, keyed by pivot (lowest set bit)."""
    basis: dict[int, int] = {}
    for row in rows:
        for pivot, vec in basis.items():
            if (row >> pivot) & 1:
                row ^= vec
        if not row:
            continue
        pivot = (row & -row).bit_length() - 1
        for other in list(basis):
            if (basis[other] >> pivot) & 1:
                basis[other] ^= row
        basis[pivot] = row
    return basis


def rank(rows: Iterable[int]) -> int:
    return len(row_reduce(rows))


def reduce(vec: int, basis: dict[int, int]) -> int:
    for pivot, row in basis.items():
        if (vec >> pivot) & 1:
            vec ^= row
    return vec


def in_span(vec: int, rows: Iterable[int]) -> bool:
    return reduce(vec, row_reduce(rows)) == 0


def solve(equations: Sequence[tuple[int, int]], n_vars: int) -> int | None:
    """Solve a·x = b for rows (a, b); free variables are set to 0.

    Each equation is stored augmented with its right-hand side in bit ``n_vars``.
    Returns the solution as a bitset over variables, or None when inconsistent.
    """
    rhs_bit = 1 << n_vars
    basis = row_reduce(a | (rhs_bit if b else 0) for a, b in equations)
    if n_vars in basis:
        return None
    solution = 0
    for pivot, row in basis.items():
        if row & rhs_bit:
            solution |= 1 << pivot
    return solution


@dataclass(frozen=True)
class ChainSpace:
    """C_1(G, Z_2) with fundamental cycle and fundamental cut bases of a BFS tree."""

    graph: WeightedGraph

    @property
    def dimension(self) -> int:
        return len(self.graph.edge_keys)

    def vector(self, edges: Iterable[Sequence[int]]) -> int:
        vec = 0
        for raw in edges:
            vec ^= 1 << self.graph.edge_index[canonical_edge(int(raw[0]), int(raw[1]))]
        return vec

    def edges(self, vec: int) -> list[Edge]:
        return [key for idx, key in enumerate(self.graph.edge_keys) if (vec >> idx) & 1]

    def coboundary(self, vertices: Iterable[int]) -> int:
        """δ of a vertex set: the edges with exactly one endpoint inside."""
        inside = set(vertices)
        return self.vector(key for key in self.graph.edge_keys if (key[0] in inside) != (key[1] in inside))

    @cached_property
    def cycle_basis(self) -> tuple[int, ...]:
        return tuple(self.vector(zip(walk, walk[1:])) for walk in fundamental_cycles(self.graph))

    @cached_property
    def cut_basis(self) -> tuple[int, ...]:
        parent, order = bfs_tree(self.graph)
        children: dict[int, list[int]] = {v: [] for v in range(self.graph.vertex_count)}
        for v in order[1:]:
            children[parent[v]].append(v)

        def _subtree(v: int) -> list[int]:
            stack, members = [v], []
            while stack:
                u = stack.pop()
                members.append(u)
                stack.extend(children[u])
            return members

        return tuple(self.coboundary(_subtree(v)) for v in order[1:])

    @cached_property
    def _cut_reduced(self) -> dict[int, int]:
        return row_reduce(self.cut_basis)

    @cached_property
    def _cycle_reduced(self) -> dict[int, int]:
        return row_reduce(self.cycle_basis)

    def in_cut_space(self, vec: int) -> bool:
        return reduce(vec, self._cut_reduced) == 0

    def in_cycle_space(self, vec: int) -> bool:
        return reduce(vec, self._cycle_reduced) == 0

    def bases_orthogonal(self) -> bool:
        return all(pairing(c, k) == 0 for c in self.cycle_basis for k in self.cut_basis)

    def is_direct_sum(self) -> bool:
        """Whether cycle space + cut space is all of C_1.

        Over GF(2) the two spaces can intersect (an even cycle is also a cut),
        so this holds only for some graphs.
        """
        return rank(self.cycle_basis + self.cut_basis) == self.dimension
