from __future__ import annotations

import logging
from dataclasses import dataclass, replace

import numpy as np

from .bounds import (
    BoundReport,
    NodalSetNotBoundary,
    RayleighCertificate,
    SignedEquipartition,
    equipartition_from_signed_eigenvector,
    lower_bound_check,
    maximize_lower_bound,
    rayleigh_certificate,
)
from .config import Profile
from .critical import (
    CertificateFailure,
    ClassificationAmbiguous,
    CriticalPoint,
    DegenerateHessian,
    NoTangentDirections,
    RestorationReport,
    RetractionFailure,
    critical_points_from_spectrum,
    deficiency_via_edge_restoration,
    lagrange_certificate,
    with_morse,
)
from .graph_core import Edge, Partition, WeightedGraph, betti_number, enumerate_partitions, is_tree_partition
from .instances import SplitMix64
from .param_partition import minimize_energy
from .signed import Signature, all_positive, plain_laplacian, signed_laplacian
from .spectral import DegenerateEigenvector, eigendecompose, is_nondegenerate, nodal_report


logger = logging.getLogger(__name__)


MINIMALITY_SLACK = 1e-8


@dataclass(frozen=True, eq=False)
class CriticalAnalysis:
    critical: CriticalPoint
    certificate: tuple[float, ...] | None
    restoration: RestorationReport | None
    note: str | None


@dataclass(frozen=True, eq=False)
class PartitionAnalysis:
    partition: Partition
    betti: int
    tree: bool
    critical_points: tuple[CriticalAnalysis, ...]


@dataclass(frozen=True, eq=False)
class MinimalPartitionReport:
    nu: int
    partitions_checked: int
    best: Partition
    best_energy: float
    lambda_nu: float
    courant_sharp: bool
    nodal_labels: tuple[int, ...] | None
    nodal_attains_minimum: bool | None


@dataclass(frozen=True, eq=False)
class LowerBoundAnalysis:
    bound: BoundReport
    maximizer: tuple[Edge, ...]
    maximized_value: float
    certificate: RayleighCertificate | None
    nodal_equipartition: SignedEquipartition | None


def analyze_critical(partition: Partition, profile: Profile) -> PartitionAnalysis:
    """Critical points of Λ on E_P with Morse index, Lagrange certificate and edge-restoration index."""
    tol = profile.tolerances
    tree = is_tree_partition(partition)
    found = critical_points_from_spectrum(partition, zero_tol=tol.zero_tol, gap_rel=tol.gap_tol, eq_tol=tol.eq_tol)
    analyses: list[CriticalAnalysis] = []
    for critical in found:
        note = None
        certificate = None
        restoration = None
        try:
            certificate = lagrange_certificate(critical)
        except CertificateFailure as exc:
            logger.info("certificate failed index=%s error=%s", critical.eigen_index, exc)
            note = str(exc)
        try:
            critical = with_morse(critical, step_scale=profile.solver.hessian_step, hess_rel_tol=tol.hess_tol)
        except NoTangentDirections:
            critical = replace(critical, morse_index=0, hessian_eigenvalues=())
            note = "tree partition: the equipartition is unique and Courant-sharp" if tree else note
        except (DegenerateHessian, RetractionFailure) as exc:
            logger.info("morse index unavailable index=%s error=%s", critical.eigen_index, exc)
            note = str(exc)
        try:
            restoration = deficiency_via_edge_restoration(critical, gap_rel=tol.gap_tol)
        except ClassificationAmbiguous as exc:
            logger.info("edge restoration ambiguous index=%s error=%s", critical.eigen_index, exc)
        analyses.append(CriticalAnalysis(critical=critical, certificate=certificate, restoration=restoration, note=note))
    return PartitionAnalysis(
        partition=partition,
        betti=betti_number(partition),
        tree=tree,
        critical_points=tuple(analyses),
    )


def enumerate_minimal_partition(
    graph: WeightedGraph,
    nu: int,
    profile: Profile,
    rng: SplitMix64,
) -> MinimalPartitionReport:
    """Exhaustive search for the ν-partition of least minimized energy.

    When ψ^(ν) of the plain Laplacian is non-degenerate and Courant-sharp its
    nodal partition has energy λ_ν, and the search confirms that nothing beats it.
    """
    tol = profile.tolerances
    best: Partition | None = None
    best_energy = np.inf
    checked = 0
    for partition in enumerate_partitions(graph, nu, vertex_cap=profile.caps.vertex_cap):
        checked += 1
        minimum = minimize_energy(
            partition,
            rng=rng.spawn(),
            starts=profile.solver.multistarts,
            eq_tol=tol.eq_tol,
            max_iter=profile.solver.newton_max_iter,
        )
        if minimum.energy < best_energy - MINIMALITY_SLACK * max(1.0, abs(best_energy)):
            best, best_energy = partition, minimum.energy
    if best is None:
        raise ValueError(f"graph has no connected {nu}-partition")

    report = eigendecompose(plain_laplacian(graph), gap_rel=tol.gap_tol)
    value = report.value(nu)
    courant_sharp = False
    nodal_labels = None
    attains = None
    if is_nondegenerate(report, nu, tol.zero_tol):
        nodal = nodal_report(all_positive(graph), report.vector(nu), nu, zero_tol=tol.zero_tol)
        courant_sharp = nodal.domain_count == nu
        if courant_sharp:
            nodal_labels = nodal.domain_labels
            attains = value <= best_energy + MINIMALITY_SLACK * max(1.0, abs(value))
            if not attains:
                logger.warning("nodal partition beaten energy=%.12g lambda=%.12g", best_energy, value)
    logger.debug("minimal partition search nu=%s partitions=%s energy=%.12g", nu, checked, best_energy)
    return MinimalPartitionReport(
        nu=nu,
        partitions_checked=checked,
        best=best,
        best_energy=float(best_energy),
        lambda_nu=value,
        courant_sharp=courant_sharp,
        nodal_labels=nodal_labels,
        nodal_attains_minimum=attains,
    )


def analyze_lower_bound(
    gamma: Signature,
    partition: Partition,
    profile: Profile,
    rng: SplitMix64,
) -> LowerBoundAnalysis:
    tol = profile.tolerances
    bound = lower_bound_check(
        gamma,
        partition,
        rng=rng,
        starts=profile.solver.multistarts,
        eq_tol=tol.eq_tol,
        zero_tol=tol.zero_tol,
        gap_rel=tol.gap_tol,
    )
    subset, value = maximize_lower_bound(partition, subset_cap=profile.caps.subset_cap)
    certificate = None
    if bound.best_point is not None:
        certificate = rayleigh_certificate(gamma, bound.best_point, frozenset(bound.witness_subset))

    nodal = None
    report = eigendecompose(signed_laplacian(gamma.graph, gamma), gap_rel=tol.gap_tol)
    if is_nondegenerate(report, partition.nu, tol.zero_tol):
        try:
            nodal = equipartition_from_signed_eigenvector(
                gamma, report.vector(partition.nu), zero_tol=tol.zero_tol, gap_rel=tol.gap_tol
            )
        except (NodalSetNotBoundary, DegenerateEigenvector) as exc:
            logger.info("no nodal equipartition nu=%s error=%s", partition.nu, exc)
    return LowerBoundAnalysis(
        bound=bound,
        maximizer=tuple(sorted(subset)),
        maximized_value=value,
        certificate=certificate,
        nodal_equipartition=nodal,
    )
