from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, seed, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from spectral_partitions import ghost as ghost_module
from spectral_partitions.ghost import (
    MismatchAt,
    anticontinuous_extension,
    build_ghost,
    ghost_operator,
    pullback_spectrum,
    reduced_operator,
    verify_discretization,
)
from spectral_partitions.graph_core import make_partition
from spectral_partitions.instances import SplitMix64, random_partition, random_small_graph
from spectral_partitions.signed import partition_laplacian


SEEDS = st.integers(min_value=0, max_value=2**64 - 1)


def test_triangle_ghost_graph(singletons):
    ghost = build_ghost(singletons)
    assert ghost.base_count == 3
    assert ghost.vertex_count == 9
    assert len(ghost.ghosts) == 3
    assert len(ghost.edges) == 6
    assert ghost.degrees == (2, 2, 2, 1, 1, 1, 1, 1, 1)
    first = ghost.ghosts[0]
    assert (first.edge, first.k, first.l) == ((0, 1), 3, 4)
    assert (0, 3, 2.0) in ghost.edges


def test_extension_is_anticontinuous(tree_split):
    ghost = build_ghost(tree_split)
    extended = anticontinuous_extension(ghost, np.array([3.0, 1.0, 5.0]))
    assert_allclose(extended, [3.0, 1.0, 5.0, 1.0, -1.0])
    assert np.abs(ghost_operator(ghost) @ extended)[3:].max() == 0.0


def test_single_component_has_no_ghosts(tri):
    partition = make_partition(tri, [0, 0, 0])
    ghost = build_ghost(partition)
    assert ghost.vertex_count == 3
    assert_allclose(reduced_operator(ghost), partition_laplacian(partition))


def test_discretization_identity_on_the_triangle(singletons):
    assert verify_discretization(singletons)
    assert_allclose(pullback_spectrum(singletons), [1.0, 1.0, 4.0], atol=1e-12)


def test_mismatch_is_reported(singletons, monkeypatch):
    monkeypatch.setattr(ghost_module, "partition_laplacian", lambda partition: np.zeros((3, 3)))
    with pytest.raises(MismatchAt) as info:
        verify_discretization(singletons)
    assert info.value.expected == 0.0


@seed(71)
@settings(deadline=None, max_examples=40)
@given(SEEDS)
def test_reduced_ghost_operator_is_the_partition_laplacian(s):
    rng = SplitMix64(s)
    graph = random_small_graph(rng)
    partition = random_partition(rng, graph, rng.randint(1, graph.vertex_count))
    assert verify_discretization(partition)
    expected = np.linalg.eigvalsh(partition_laplacian(partition))
    assert_allclose(pullback_spectrum(partition), expected, atol=1e-9 * max(1.0, float(np.abs(expected).max())))
