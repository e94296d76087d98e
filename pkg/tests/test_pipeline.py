from __future__ import annotations

import math
from dataclasses import replace

import pytest

from spectral_partitions import pipeline
from spectral_partitions.config import Profile, with_overrides
from spectral_partitions.critical import critical_points_from_spectrum
from spectral_partitions.instances import SplitMix64
from spectral_partitions.pipeline import analyze_critical, analyze_lower_bound, enumerate_minimal_partition
from spectral_partitions.signed import all_negative


@pytest.fixture
def quick_profile() -> Profile:
    profile = Profile()
    return replace(profile, solver=replace(profile.solver, multistarts=3))


def test_analyze_critical_on_the_triangle(singletons, quick_profile):
    analysis = analyze_critical(singletons, quick_profile)
    assert analysis.betti == 1
    assert not analysis.tree
    assert len(analysis.critical_points) == 1
    entry = analysis.critical_points[0]
    assert entry.critical.morse_index == 0
    assert entry.critical.deficiency == 0
    assert entry.certificate == pytest.approx((1 / 3, 1 / 3, 1 / 3))
    assert entry.restoration.consistent
    assert entry.note is None


def test_analyze_critical_on_a_tree_partition(tree_split, quick_profile):
    analysis = analyze_critical(tree_split, quick_profile)
    assert analysis.tree
    entry = analysis.critical_points[0]
    assert entry.critical.morse_index == 0
    assert entry.critical.hessian_eigenvalues == ()
    assert "tree partition" in entry.note


def test_profile_hessian_step_reaches_the_morse_index(singletons, quick_profile):
    # a step of 10·(1 + max α) leaves the positive orthant along the tangent (1, −1, 1)
    coarse = replace(quick_profile, solver=replace(quick_profile.solver, hessian_step=10.0))
    entry = analyze_critical(singletons, coarse).critical_points[0]
    assert entry.critical.morse_index is None
    assert "positive orthant" in entry.note


def test_profile_eq_tol_reaches_the_critical_point_search(singletons, quick_profile, monkeypatch):
    seen = []

    def _recording(partition, **kwargs):
        seen.append(kwargs["eq_tol"])
        return critical_points_from_spectrum(partition, **kwargs)

    monkeypatch.setattr(pipeline, "critical_points_from_spectrum", _recording)
    analyze_critical(singletons, with_overrides(quick_profile, eq_tol=3e-7))
    assert seen == [3e-7]


def test_minimal_partition_of_the_weighted_path(weighted_path, quick_profile):
    report = enumerate_minimal_partition(weighted_path, 2, quick_profile, SplitMix64(0))
    assert report.partitions_checked == 2
    assert report.best.labels == (0, 1, 1)
    assert report.best_energy == pytest.approx(3 - math.sqrt(3), rel=1e-8)
    assert report.lambda_nu == pytest.approx(3 - math.sqrt(3))
    assert report.courant_sharp
    assert report.nodal_labels == (0, 1, 1)
    assert report.nodal_attains_minimum


def test_minimal_partition_needs_enough_vertices(weighted_path, quick_profile):
    with pytest.raises(ValueError):
        enumerate_minimal_partition(weighted_path, 4, quick_profile, SplitMix64(0))


def test_lower_bound_analysis_on_the_triangle(singletons, quick_profile):
    analysis = analyze_lower_bound(all_negative(singletons.graph), singletons, quick_profile, SplitMix64(0))
    assert analysis.bound.equality_case
    assert analysis.maximizer == ((0, 1), (0, 2), (1, 2))
    assert analysis.maximized_value == pytest.approx(4.0)
    assert analysis.certificate.holds


def test_lower_bound_analysis_reports_the_nodal_equipartition(singletons, quick_profile):
    analysis = analyze_lower_bound(all_negative(singletons.graph), singletons, quick_profile, SplitMix64(0))
    nodal = analysis.nodal_equipartition
    assert nodal.partition.labels == singletons.labels
    assert nodal.energy == pytest.approx(4.0)
    assert nodal.eigenvalue == pytest.approx(4.0)
