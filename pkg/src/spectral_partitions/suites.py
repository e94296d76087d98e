"""Seeded verification suites.

Each suite draws one independent instance per index from a SplitMix64 stream
seeded by the run seed, checks one family of properties on it and returns a
JSON-ready detail dict. Instances are processed in index order, so a report
is byte-identical for a given (suite, seed, count, profile).
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Any, Callable

import numpy as np
import scipy.linalg

from .bounds import (
    NodalSetNotBoundary,
    NotInClass,
    equipartition_from_signed_eigenvector,
    homologous,
    lower_bound_check,
    partition_class_membership,
    rayleigh_certificate,
)
from .config import Profile
from .critical import (
    ClassificationAmbiguous,
    DegenerateHessian,
    DegenerateSegment,
    EdgeCurve,
    RetractionFailure,
    critical_points_from_spectrum,
    deficiency_via_edge_restoration,
    edge_curve,
    interlacing_bounds,
    morse_index,
)
from .formats import courant_rows_to_list, num_str
from .gf2 import ChainSpace
from .ghost import pullback_spectrum, verify_discretization
from .graph_core import (
    CapExceeded,
    Edge,
    Partition,
    SpectralPartitionError,
    WeightedGraph,
    betti_number,
    enumerate_partitions,
)
from .instances import (
    SplitMix64,
    random_graph,
    random_partition,
    random_signature,
    random_small_graph,
    random_switching,
    random_tree,
)
from .param_partition import (
    DegenerateBlock,
    LeftPositiveOrthant,
    NoConvergence,
    ParamPoint,
    make_param_point,
    phi,
    phi_jacobian,
    solve_equipartition,
    transversality,
)
from .pipeline import enumerate_minimal_partition
from .signed import (
    Signature,
    all_positive,
    conjugate_by_switching,
    partition_laplacian,
    plain_laplacian,
    signed_laplacian,
    switch,
    switching_equivalent,
)
from .spectral import (
    CourantViolation,
    courant_check,
    eigendecompose,
    is_nondegenerate,
    nodal_partition,
    nodal_report,
)


logger = logging.getLogger(__name__)


Detail = dict[str, Any]
SuiteCheck = Callable[[SplitMix64, Profile], tuple[bool, Detail]]

CURVE_GRID = np.concatenate([-np.geomspace(1e2, 1e-2, 61), np.geomspace(1e-2, 1e2, 61)])
TREE_STARTS = 20
TREE_MATCH_TOL = 1e-7
GHOST_PULLBACK_TOL = 1e-9
EQUIPARTITION_TOL = 1e-9
MEMBERSHIP_SEARCH_CAP = 10


class SuiteFailed(SpectralPartitionError):
    def __init__(self, *, suite: str, failures: int, count: int):
        super().__init__(f"suite {suite}: {failures} of {count} instances failed")
        self.suite = suite
        self.failures = failures
        self.count = count


@dataclass(frozen=True)
class CheckResult:
    instance: int
    passed: bool
    skipped: bool
    detail: Detail


@dataclass(frozen=True)
class SuiteResult:
    suite: str
    seed: int
    count: int
    checks: tuple[CheckResult, ...]

    @property
    def failures(self) -> int:
        return sum(1 for check in self.checks if not check.passed)

    @property
    def passed(self) -> bool:
        return self.failures == 0

    def to_dict(self) -> Detail:
        return {
            "suite": self.suite,
            "seed": self.seed,
            "count": self.count,
            "passed": self.passed,
            "failures": self.failures,
            "skipped": sum(1 for check in self.checks if check.skipped),
            "checks": [
                {"instance": c.instance, "passed": c.passed, "skipped": c.skipped, **c.detail} for c in self.checks
            ],
        }


def _skip(reason: str) -> tuple[bool, Detail]:
    return True, {"skipped_reason": reason}


def _scale(value: float) -> float:
    return max(1.0, abs(value))


def _random_edge(rng: SplitMix64, graph: WeightedGraph) -> Edge:
    return rng.choice(graph.edge_keys)


def _nodal_instance(rng: SplitMix64, profile: Profile, *, tree: bool = False) -> tuple[Partition, np.ndarray, int] | None:
    """Nodal partition of a random non-degenerate plain Laplacian eigenvector with at least two domains."""
    n = rng.randint(3, 8)
    graph = random_tree(rng, n) if tree else random_graph(rng, n, rng.uniform(0.35, 0.8))
    report = eigendecompose(plain_laplacian(graph), gap_rel=profile.tolerances.gap_tol)
    k = rng.randint(2, n)
    if not is_nondegenerate(report, k, profile.tolerances.zero_tol):
        return None
    psi = report.vector(k)
    partition = nodal_partition(all_positive(graph), psi, zero_tol=profile.tolerances.zero_tol)
    return partition, np.abs(psi), k


def check_courant(rng: SplitMix64, profile: Profile) -> tuple[bool, Detail]:
    graph = random_graph(rng, rng.randint(3, 10), rng.uniform(0.3, 0.8))
    signature = random_signature(rng, graph)
    try:
        rows = courant_check(signature, zero_tol=profile.tolerances.zero_tol, gap_rel=profile.tolerances.gap_tol)
    except CourantViolation as exc:
        return False, {"vertices": graph.vertex_count, "index": exc.index, "nodal_count": exc.nodal_count}
    return True, {
        "vertices": graph.vertex_count,
        "checked": len(rows),
        "courant_sharp": sum(1 for row in rows if row.deficiency == 0),
        "rows": courant_rows_to_list(rows),
    }


def check_nodal_switching(rng: SplitMix64, profile: Profile) -> tuple[bool, Detail]:
    graph = random_small_graph(rng, 3, 10)
    signature = random_signature(rng, graph)
    tau = random_switching(rng, graph.vertex_count)
    switched = switch(signature, tau)
    report = eigendecompose(signed_laplacian(graph, signature), gap_rel=profile.tolerances.gap_tol)
    k = rng.randint(1, graph.vertex_count)
    psi = report.vector(k)
    before = nodal_report(signature, psi, zero_tol=profile.tolerances.zero_tol)
    after = nodal_report(switched, tau.vector * psi, zero_tol=profile.tolerances.zero_tol)
    same_domains = before.domain_labels == after.domain_labels and set(before.nodal_set) == set(after.nodal_set)
    conjugated = scipy.linalg.eigvalsh(conjugate_by_switching(signed_laplacian(graph, signature), tau))
    drift = float(np.abs(conjugated - scipy.linalg.eigvalsh(signed_laplacian(graph, switched))).max())
    same_spectrum = drift <= 1e-10 * _scale(float(report.eigenvalues[-1]))
    return same_domains and same_spectrum, {
        "vertices": graph.vertex_count,
        "index": k,
        "domains": before.domain_count,
        "spectrum_drift": num_str(drift),
    }


def check_interlacing(rng: SplitMix64, profile: Profile) -> tuple[bool, Detail]:
    graph = random_small_graph(rng, 3, 10)
    signature = random_signature(rng, graph)
    edge = _random_edge(rng, graph)
    alpha = rng.uniform(0.05, 20.0) * (1 if rng.random() < 0.5 else -1)
    report = interlacing_bounds(signature, edge, alpha)
    scale = _scale(float(np.abs(scipy.linalg.eigvalsh(signed_laplacian(graph, signature))).max()))
    return report.min_slack >= -1e-9 * scale, {
        "vertices": graph.vertex_count,
        "edge": list(edge),
        "alpha": num_str(alpha),
        "min_slack": num_str(report.min_slack),
    }


def _curve_instance(rng: SplitMix64, profile: Profile) -> tuple[WeightedGraph, Edge, int, EdgeCurve]:
    graph = random_small_graph(rng, 3, 8)
    signature = random_signature(rng, graph)
    edge = _random_edge(rng, graph)
    m = rng.randint(1, graph.vertex_count)
    curve = edge_curve(signature, edge, m, CURVE_GRID, gap_rel=profile.tolerances.gap_tol)
    return graph, edge, m, curve


def check_correspondence(rng: SplitMix64, profile: Profile) -> tuple[bool, Detail]:
    try:
        graph, edge, m, curve = _curve_instance(rng, profile)
    except DegenerateSegment:
        return _skip("eigenvalue curve degenerate on the whole grid")
    ok = True
    for point in curve.critical_points:
        if point.branch is None:
            ok = False
        if point.branch == "kernel":
            if point.base_residual is None or point.base_residual > 1e-8 * _scale(point.eigenvalue):
                ok = False
            if point.base_index is not None and abs(point.base_index - m) > 1:
                ok = False
    return ok, {
        "vertices": graph.vertex_count,
        "edge": list(edge),
        "index": m,
        "critical": len(curve.critical_points),
        "kernel": sum(1 for p in curve.critical_points if p.branch == "kernel"),
        "excluded_segments": len(curve.excluded_segments),
    }


def check_shift(rng: SplitMix64, profile: Profile) -> tuple[bool, Detail]:
    try:
        graph, edge, m, curve = _curve_instance(rng, profile)
    except DegenerateSegment:
        return _skip("eigenvalue curve degenerate on the whole grid")
    verdicts = [p.shift_consistent for p in curve.critical_points if p.shift_consistent is not None]
    return all(verdicts), {
        "vertices": graph.vertex_count,
        "edge": list(edge),
        "index": m,
        "classified": len(verdicts),
        "shifts": [[num_str(p.alpha), p.maximum_flag, p.index_shift] for p in curve.critical_points if p.shift_consistent is not None],
    }


def check_equipartition(rng: SplitMix64, profile: Profile) -> tuple[bool, Detail]:
    graph = random_small_graph(rng, 3, 8)
    gamma = random_signature(rng, graph)
    tol = profile.tolerances
    report = eigendecompose(signed_laplacian(graph, gamma), gap_rel=tol.gap_tol)
    checked = 0
    interior = 0
    ok = True
    for k in range(1, report.size + 1):
        if not is_nondegenerate(report, k, tol.zero_tol):
            continue
        try:
            found = equipartition_from_signed_eigenvector(
                gamma, report.vector(k), zero_tol=tol.zero_tol, gap_rel=tol.gap_tol
            )
        except NodalSetNotBoundary:
            interior += 1
            continue
        values = phi(found.point)
        spread_ok = float(np.ptp(values)) <= EQUIPARTITION_TOL * _scale(found.energy)
        energy_ok = abs(found.energy - report.value(k)) <= EQUIPARTITION_TOL * _scale(report.value(k))
        if not (spread_ok and energy_ok):
            logger.warning("equipartition check failed index=%s spread=%.3e", k, np.ptp(values))
            ok = False
        checked += 1
    if checked == 0:
        reason = "no eigenvector whose nodal set is a partition boundary"
        return True, {"skipped_reason": reason, "interior_nodal": interior}
    return ok, {"vertices": graph.vertex_count, "eigenvectors": checked, "interior_nodal": interior}


def check_transversality(rng: SplitMix64, profile: Profile) -> tuple[bool, Detail]:
    instance = _nodal_instance(rng, profile)
    if instance is None:
        return _skip("eigenvector degenerate")
    partition, psi, k = instance
    centre = np.array([psi[j] / psi[i] for i, j in partition.boundary])
    start = centre * np.exp([rng.uniform(-0.3, 0.3) for _ in centre])
    try:
        point = solve_equipartition(
            partition, start, eq_tol=profile.tolerances.eq_tol, max_iter=profile.solver.newton_max_iter
        )
        report = transversality(point)
    except (NoConvergence, LeftPositiveOrthant, DegenerateBlock) as exc:
        return _skip(type(exc).__name__)
    ok = report.transversal and report.cokernel_single_signed is not False
    return ok, {
        "vertices": partition.graph.vertex_count,
        "nu": partition.nu,
        "betti": betti_number(partition),
        "augmented_rank": report.augmented_rank,
        "cokernel_dimension": report.cokernel_dimension,
    }


def _finite_difference_jacobian(point: ParamPoint) -> np.ndarray:
    alpha = point.as_array()
    columns = []
    for col in range(len(alpha)):
        h = 1e-6 * alpha[col]
        up, down = alpha.copy(), alpha.copy()
        up[col] += h
        down[col] -= h
        columns.append((phi(make_param_point(point.partition, up)) - phi(make_param_point(point.partition, down))) / (2 * h))
    return np.column_stack(columns)


def check_jacobian(rng: SplitMix64, profile: Profile) -> tuple[bool, Detail]:
    graph = random_small_graph(rng, 3, 8)
    partition = random_partition(rng, graph, rng.randint(2, min(4, graph.vertex_count)))
    point = make_param_point(partition, [float(np.exp(rng.uniform(-1.5, 1.5))) for _ in partition.boundary])
    try:
        analytic = phi_jacobian(point, gap_rel=profile.tolerances.gap_tol)
    except DegenerateBlock:
        return _skip("component ground state not simple")
    numeric = _finite_difference_jacobian(point)
    error = float(np.abs(analytic - numeric).max())
    scale = max(1.0, float(np.abs(analytic).max()))
    return error <= profile.tolerances.fd_rel_tol * scale, {
        "vertices": graph.vertex_count,
        "nu": partition.nu,
        "boundary": len(partition.boundary),
        "max_error": num_str(error),
    }


def check_tree_unique(rng: SplitMix64, profile: Profile) -> tuple[bool, Detail]:
    instance = _nodal_instance(rng, profile, tree=True)
    if instance is None:
        return _skip("eigenvector degenerate")
    partition, _, _ = instance
    tol = profile.tolerances
    found = critical_points_from_spectrum(partition, zero_tol=tol.zero_tol, gap_rel=tol.gap_tol, eq_tol=tol.eq_tol)
    solved: list[np.ndarray] = []
    for _ in range(TREE_STARTS):
        start = [float(np.exp(rng.uniform(-1.0, 1.0))) for _ in partition.boundary]
        try:
            point = solve_equipartition(partition, start, eq_tol=tol.eq_tol, max_iter=profile.solver.newton_max_iter)
        except (NoConvergence, LeftPositiveOrthant, DegenerateBlock):
            continue
        solved.append(point.as_array())

    detail = {
        "vertices": partition.graph.vertex_count,
        "nu": partition.nu,
        "critical": len(found),
        "solved": len(solved),
    }
    if len(found) != 1 or found[0].deficiency != 0:
        return False, detail
    centre = found[0].point.as_array()
    spread = max((float(np.abs(a - centre).max() / max(1.0, np.abs(centre).max())) for a in solved), default=0.0)
    detail["max_distance"] = num_str(spread)
    return spread <= TREE_MATCH_TOL, detail


def check_morse(rng: SplitMix64, profile: Profile) -> tuple[bool, Detail]:
    graph = random_small_graph(rng, 4, 6)
    tol = profile.tolerances
    compared = 0
    restored = 0
    undecided = 0
    mismatches: list[list[int]] = []
    for nu in (2, 3):
        for partition in enumerate_partitions(graph, nu, vertex_cap=profile.caps.vertex_cap):
            if betti_number(partition) == 0:
                continue
            for critical in critical_points_from_spectrum(
                partition, zero_tol=tol.zero_tol, gap_rel=tol.gap_tol, eq_tol=tol.eq_tol
            ):
                try:
                    index, _ = morse_index(
                        critical, step_scale=profile.solver.hessian_step, hess_rel_tol=tol.hess_tol
                    )
                except (DegenerateHessian, RetractionFailure):
                    undecided += 1
                    continue
                compared += 1
                if index != critical.deficiency:
                    mismatches.append([*partition.labels, critical.eigen_index, index])
                try:
                    if not deficiency_via_edge_restoration(critical, gap_rel=tol.gap_tol).consistent:
                        mismatches.append([*partition.labels, critical.eigen_index, -1])
                    restored += 1
                except ClassificationAmbiguous:
                    undecided += 1
    return not mismatches, {
        "vertices": graph.vertex_count,
        "compared": compared,
        "restorations": restored,
        "undecided": undecided,
        "mismatches": mismatches,
    }


def check_lower_bound(rng: SplitMix64, profile: Profile) -> tuple[bool, Detail]:
    graph = random_small_graph(rng, 3, 7)
    partition = random_partition(rng, graph, rng.randint(2, min(4, graph.vertex_count)))
    chosen = frozenset(edge for edge in partition.boundary if rng.random() < 0.5)
    gamma = switch(Signature(graph=graph, negative_edges=chosen), random_switching(rng, graph.vertex_count))
    tol = profile.tolerances
    try:
        report = lower_bound_check(
            gamma,
            partition,
            rng=rng,
            starts=profile.solver.multistarts,
            eq_tol=tol.eq_tol,
            zero_tol=tol.zero_tol,
            gap_rel=tol.gap_tol,
        )
    except NotInClass:
        return False, {"vertices": graph.vertex_count, "error": "NotInClass"}
    ok = report.slack >= -1e-9 * _scale(report.lambda_nu)
    holds = None
    if report.best_point is not None:
        holds = rayleigh_certificate(gamma, report.best_point, frozenset(report.witness_subset)).holds
        ok = ok and holds
    return ok, {
        "vertices": graph.vertex_count,
        "nu": partition.nu,
        "slack": num_str(report.slack),
        "equality_case": report.equality_case,
        "certificate_holds": holds,
    }


def check_global_min(rng: SplitMix64, profile: Profile) -> tuple[bool, Detail]:
    graph = random_small_graph(rng, 4, 6)
    nu = rng.randint(2, 3)
    tol = profile.tolerances
    report = eigendecompose(plain_laplacian(graph), gap_rel=tol.gap_tol)
    if not is_nondegenerate(report, nu, tol.zero_tol):
        return _skip("eigenvector degenerate")
    if nodal_report(all_positive(graph), report.vector(nu), nu, zero_tol=tol.zero_tol).domain_count != nu:
        return _skip("eigenvector not Courant-sharp")
    try:
        found = enumerate_minimal_partition(graph, nu, profile, rng)
    except CapExceeded as exc:
        return _skip(str(exc))
    return bool(found.nodal_attains_minimum), {
        "vertices": graph.vertex_count,
        "nu": nu,
        "partitions": found.partitions_checked,
        "lambda_nu": num_str(found.lambda_nu),
        "best_energy": num_str(found.best_energy),
    }


def check_homology(rng: SplitMix64, profile: Profile) -> tuple[bool, Detail]:
    graph = random_small_graph(rng, 3, 10)
    first = random_signature(rng, graph)
    if rng.random() < 0.5:
        second = switch(first, random_switching(rng, graph.vertex_count))
    else:
        second = random_signature(rng, graph)
    gf2_verdict = homologous(first, second)
    constructive = switching_equivalent(first, second) is not None
    chains = ChainSpace(graph)

    partition = random_partition(rng, graph, rng.randint(1, graph.vertex_count))
    membership_agrees = True
    if len(partition.boundary) <= min(MEMBERSHIP_SEARCH_CAP, profile.caps.subset_cap):
        by_gf2 = partition_class_membership(partition, first, method="gf2")
        by_search = partition_class_membership(partition, first, method="enumerate", subset_cap=profile.caps.subset_cap)
        membership_agrees = (by_gf2 is None) == (by_search is None)
    ok = gf2_verdict == constructive and chains.bases_orthogonal() and membership_agrees
    return ok, {
        "vertices": graph.vertex_count,
        "homologous": gf2_verdict,
        "switching_equivalent": constructive,
        "membership_agrees": membership_agrees,
    }


def check_ghost(rng: SplitMix64, profile: Profile) -> tuple[bool, Detail]:
    graph = random_small_graph(rng, 3, 8)
    checked = 0
    for nu in range(1, graph.vertex_count + 1):
        for partition in enumerate_partitions(graph, nu, vertex_cap=profile.caps.vertex_cap):
            verify_discretization(partition)
            expected = scipy.linalg.eigvalsh(partition_laplacian(partition))
            drift = float(np.abs(pullback_spectrum(partition) - expected).max())
            if drift > GHOST_PULLBACK_TOL * _scale(float(expected[-1])):
                return False, {"vertices": graph.vertex_count, "labels": list(partition.labels), "drift": num_str(drift)}
            checked += 1
    return True, {"vertices": graph.vertex_count, "partitions": checked}


SUITES: dict[str, SuiteCheck] = {
    "courant": check_courant,
    "nodal-switching": check_nodal_switching,
    "interlacing": check_interlacing,
    "correspondence": check_correspondence,
    "shift": check_shift,
    "equipartition": check_equipartition,
    "transversality": check_transversality,
    "jacobian": check_jacobian,
    "tree-unique": check_tree_unique,
    "morse": check_morse,
    "lower-bound": check_lower_bound,
    "global-min": check_global_min,
    "homology": check_homology,
    "ghost": check_ghost,
}


def run_suite(name: str, seed: int, count: int, profile: Profile) -> SuiteResult:
    if name not in SUITES:
        raise ValueError(f"unknown suite {name!r}; choose from {', '.join(sorted(SUITES))}")
    if count <= 0:
        raise ValueError("count must be > 0")
    check = SUITES[name]
    stream = SplitMix64(seed)
    results: list[CheckResult] = []
    for index in range(count):
        rng = stream.spawn()
        try:
            passed, detail = check(rng, profile)
        except SpectralPartitionError as exc:
            logger.warning("suite instance raised suite=%s instance=%s error=%s", name, index, type(exc).__name__)
            passed, detail = False, {"error": type(exc).__name__, "message": str(exc)}
        skipped = "skipped_reason" in detail
        if not passed:
            logger.warning("suite instance failed suite=%s instance=%s", name, index)
        results.append(CheckResult(instance=index, passed=passed, skipped=skipped, detail=detail))
    result = SuiteResult(suite=name, seed=seed, count=count, checks=tuple(results))
    logger.info("suite finished suite=%s count=%s failures=%s", name, count, result.failures)
    return result
