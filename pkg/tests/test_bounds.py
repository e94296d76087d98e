from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, seed, settings
from hypothesis import strategies as st

from spectral_partitions.bounds import (
    NodalSetNotBoundary,
    NotInClass,
    equipartition_from_signed_eigenvector,
    homologous,
    lambda_nu,
    lower_bound_check,
    maximize_lower_bound,
    partition_class_membership,
    rayleigh_certificate,
)
from spectral_partitions.graph_core import CapExceeded, build_graph, make_partition
from spectral_partitions.instances import SplitMix64, random_partition, random_small_graph, random_switching
from spectral_partitions.param_partition import phi, unit_point
from spectral_partitions.signed import (
    Signature,
    all_negative,
    all_positive,
    boundary_signature,
    make_signature,
    plain_laplacian,
    signed_laplacian,
    switch,
)
from spectral_partitions.spectral import eigendecompose


SEEDS = st.integers(min_value=0, max_value=2**64 - 1)


@pytest.mark.parametrize("method", ["gf2", "enumerate"])
def test_membership_witness_is_a_homologous_boundary_subset(tri, method):
    partition = make_partition(tri, [0, 0, 1])
    gamma = make_signature(tri, [(0, 1)])
    witness = partition_class_membership(partition, gamma, method=method)
    assert witness is not None
    assert witness <= partition.boundary_set
    assert homologous(gamma, Signature(graph=tri, negative_edges=witness))


@pytest.mark.parametrize("method", ["gf2", "enumerate"])
def test_unbalanced_signature_is_outside_the_trivial_partition(tri, method):
    partition = make_partition(tri, [0, 0, 0])
    assert partition_class_membership(partition, make_signature(tri, [(0, 1)]), method=method) is None


def test_membership_rejects_unknown_method(singletons):
    with pytest.raises(ValueError):
        partition_class_membership(singletons, all_negative(singletons.graph), method="guess")


def test_lower_bound_needs_class_membership(tri):
    with pytest.raises(NotInClass):
        lower_bound_check(make_signature(tri, [(0, 1)]), make_partition(tri, [0, 0, 0]))


def test_lower_bound_equality_on_the_triangle(singletons):
    report = lower_bound_check(all_negative(singletons.graph), singletons)
    assert report.lambda_nu == pytest.approx(4.0)
    assert report.inf_energy_estimate == pytest.approx(4.0, rel=1e-9)
    assert abs(report.slack) < 1e-8
    assert report.equality_case
    assert report.witness_subset == ((0, 1), (0, 2), (1, 2))


def test_lower_bound_equality_on_a_tree_partition(tree_split):
    report = lower_bound_check(boundary_signature(tree_split), tree_split, rng=SplitMix64(2), starts=3)
    assert report.lambda_nu == pytest.approx(3 - math.sqrt(3))
    assert abs(report.slack) < 1e-8
    assert report.equality_case


def test_lower_bound_is_strict_without_an_equipartition(weighted_path):
    partition = make_partition(weighted_path, [0, 0, 1])
    report = lower_bound_check(boundary_signature(partition), partition, rng=SplitMix64(3), starts=3)
    assert report.lambda_nu == pytest.approx(3 - math.sqrt(3))
    assert report.slack > 0.7
    assert not report.equality_case


def test_maximize_lower_bound_prefers_the_larger_subset(singletons):
    subset, value = maximize_lower_bound(singletons)
    assert subset == singletons.boundary_set
    assert value == pytest.approx(4.0)
    assert lambda_nu(all_positive(singletons.graph), 3) == pytest.approx(3.0)
    with pytest.raises(CapExceeded):
        maximize_lower_bound(singletons, subset_cap=2)


def test_equipartition_from_an_all_negative_eigenvector(tri):
    found = equipartition_from_signed_eigenvector(all_negative(tri), np.ones(3) / math.sqrt(3))
    assert found.partition.labels == (0, 1, 2)
    assert found.point.alpha == pytest.approx((1.0, 1.0, 1.0))
    assert found.energy == pytest.approx(4.0)
    assert found.eigenvalue == pytest.approx(4.0)


def test_equipartition_from_a_plain_eigenvector(weighted_path):
    psi = eigendecompose(plain_laplacian(weighted_path)).vector(2)
    found = equipartition_from_signed_eigenvector(all_positive(weighted_path), psi)
    assert found.partition.labels == (0, 1, 1)
    assert found.point.alpha[0] == pytest.approx(2 - math.sqrt(3), rel=1e-10)
    assert found.energy == pytest.approx(found.eigenvalue, rel=1e-10)


@pytest.fixture
def weak_negative_triangle():
    graph = build_graph(3, [(0, 1, 0.1), (1, 2, 10.0), (0, 2, 10.0)])
    return make_signature(graph, [(0, 1)])


def test_nodal_edge_inside_a_domain_is_not_a_partition_boundary(weak_negative_triangle):
    report = eigendecompose(signed_laplacian(weak_negative_triangle.graph, weak_negative_triangle))
    # ground state is single-signed, so the nodal edge (0, 1) joins two vertices of the only domain
    with pytest.raises(NodalSetNotBoundary) as excinfo:
        equipartition_from_signed_eigenvector(weak_negative_triangle, report.vector(1))
    assert excinfo.value.interior_edges == ((0, 1),)


def test_top_eigenvector_of_the_weak_negative_triangle_gives_singletons(weak_negative_triangle):
    report = eigendecompose(signed_laplacian(weak_negative_triangle.graph, weak_negative_triangle))
    found = equipartition_from_signed_eigenvector(weak_negative_triangle, report.vector(3))
    assert found.partition.labels == (0, 1, 2)
    assert found.energy == pytest.approx(report.value(3), rel=1e-9)
    assert float(np.ptp(phi(found.point))) <= 1e-9 * found.energy


def test_rayleigh_certificate_on_the_triangle(singletons):
    certificate = rayleigh_certificate(all_negative(singletons.graph), unit_point(singletons), singletons.boundary_set)
    assert certificate.holds
    assert certificate.quotient == pytest.approx(4.0)
    assert certificate.lambda_nu == pytest.approx(4.0)
    assert certificate.remainder_min_eigenvalue == pytest.approx(0.0, abs=1e-12)


@seed(61)
@settings(deadline=None, max_examples=10)
@given(SEEDS)
def test_switched_boundary_subsets_bound_the_energy(s):
    rng = SplitMix64(s)
    graph = random_small_graph(rng, 3, 6)
    partition = random_partition(rng, graph, rng.randint(2, graph.vertex_count))
    subset = frozenset(e for e in partition.boundary if rng.random() < 0.5)
    gamma = switch(Signature(graph=graph, negative_edges=subset), random_switching(rng, graph.vertex_count))
    report = lower_bound_check(gamma, partition, rng=rng, starts=2)
    assert report.slack >= -1e-9 * max(1.0, abs(report.lambda_nu))
    certificate = rayleigh_certificate(gamma, report.best_point, frozenset(report.witness_subset))
    assert certificate.holds
