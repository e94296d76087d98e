from __future__ import annotations

import logging
from dataclasses import dataclass, replace
from typing import Literal, Sequence

import networkx as nx
import numpy as np
import scipy.linalg

from .graph_core import Edge, Partition, SpectralPartitionError, betti_number, canonical_edge
from .param_partition import (
    NoConvergence,
    ParamPoint,
    ZeroAlpha,
    energy,
    ground_states,
    is_equipartition,
    make_param_point,
    normal_basis,
    phi,
    phi_jacobian,
    project_to_equipartition,
    tangent_basis,
)
from .signed import Signature, boundary_signature, partition_laplacian, signed_laplacian
from .spectral import (
    DEFAULT_GAP_REL,
    DEFAULT_ZERO_TOL,
    eigen_index_by_overlap,
    eigendecompose,
    is_nondegenerate,
)


logger = logging.getLogger(__name__)


GRADIENT_TOL = 1e-7
CERTIFICATE_TOL = 1e-8
HESSIAN_STEP = 1e-4
HESSIAN_REL_TOL = 1e-6
RETRACTION_TOL = 1e-12
CURVE_ROOT_TOL = 1e-10
BRANCH_TOL = 1e-6
KINK_TOL = 1e-4

Extremum = Literal["max", "min", "ambiguous"]


class CertificateFailure(SpectralPartitionError):
    def __init__(self, *, detail: str):
        super().__init__(f"lagrange certificate failed: {detail}")
        self.detail = detail


class DegenerateHessian(SpectralPartitionError):
    def __init__(self, *, eigenvalue: float, tolerance: float):
        super().__init__(f"hessian eigenvalue {eigenvalue:.3e} within tolerance {tolerance:.3e} of zero")
        self.eigenvalue = eigenvalue
        self.tolerance = tolerance


class RetractionFailure(SpectralPartitionError):
    def __init__(self, *, offset: Sequence[float], detail: str):
        super().__init__(f"retraction onto the equipartition set failed at offset {list(offset)}: {detail}")
        self.offset = tuple(offset)
        self.detail = detail


class NoTangentDirections(SpectralPartitionError):
    pass


class DegenerateSegment(SpectralPartitionError):
    def __init__(self, *, low: float, high: float):
        super().__init__(f"eigenvalue curve is not simple on [{low!r}, {high!r}]")
        self.low = low
        self.high = high


class ClassificationAmbiguous(SpectralPartitionError):
    def __init__(self, *, edge: Edge, second_difference: float = float("nan"), detail: str | None = None):
        reason = detail or f"second difference {second_difference:.3e}"
        super().__init__(f"cannot classify critical point on edge {edge} ({reason})")
        self.edge = edge
        self.second_difference = second_difference


@dataclass(frozen=True, eq=False)
class CriticalPoint:
    point: ParamPoint
    eigenvector: np.ndarray
    eigen_index: int
    energy: float
    nu: int
    deficiency: int
    projected_gradient: float
    morse_index: int | None = None
    hessian_eigenvalues: tuple[float, ...] | None = None


@dataclass(frozen=True)
class CurveCritical:
    alpha: float
    eigenvalue: float
    kind: Extremum
    branch: Literal["kernel", "mirror"] | None
    base_index: int | None = None
    index_shift: int | None = None
    maximum_flag: int | None = None
    base_residual: float | None = None

    @property
    def shift_consistent(self) -> bool | None:
        """M − Δm should be 0 for α > 0 and 1 for α < 0 on kernel-branch points."""
        if self.base_index is None or self.index_shift is None or self.maximum_flag is None:
            return None
        expected = 0 if self.alpha > 0 else 1
        return self.maximum_flag - self.index_shift == expected


@dataclass(frozen=True, eq=False)
class EdgeCurve:
    edge: Edge
    index: int
    grid: np.ndarray
    values: np.ndarray
    excluded_segments: tuple[tuple[float, float], ...]
    critical_points: tuple[CurveCritical, ...]


@dataclass(frozen=True, eq=False)
class InterlacingReport:
    edge: Edge
    alpha: float
    lower_slack: np.ndarray
    upper_slack: np.ndarray

    @property
    def min_slack(self) -> float:
        return float(min(self.lower_slack.min(initial=np.inf), self.upper_slack.min(initial=np.inf)))


@dataclass(frozen=True)
class RestorationReport:
    removed_edges: tuple[Edge, ...]
    start_index: int
    maximum_flags: tuple[int, ...]
    predicted_index: int
    actual_index: int

    @property
    def consistent(self) -> bool:
        return self.predicted_index == self.actual_index


def _projected_gradient(point: ParamPoint) -> float:
    if betti_number(point.partition) == 0:
        return 0.0
    tangent = tangent_basis(point)
    if tangent.shape[1] == 0:
        return 0.0
    nu = point.partition.nu
    gradient = phi_jacobian(point).T @ np.full(nu, 1.0 / nu)
    return float(np.linalg.norm(tangent.T @ gradient))


def critical_points_from_spectrum(
    partition: Partition,
    *,
    zero_tol: float = DEFAULT_ZERO_TOL,
    gap_rel: float = DEFAULT_GAP_REL,
    eq_tol: float = 1e-9,
) -> list[CriticalPoint]:
    """Critical points of Λ on E_P, one per non-degenerate single-signed eigenvector of L^∂P."""
    report = eigendecompose(partition_laplacian(partition), gap_rel=gap_rel)
    found: list[CriticalPoint] = []
    for n in range(1, report.size + 1):
        psi = report.vector(n)
        if not (np.all(psi > 0) or np.all(psi < 0)):
            continue
        if not is_nondegenerate(report, n, zero_tol):
            logger.info("degenerate eigenvector skipped index=%s", n)
            continue
        psi = np.abs(psi)
        point = make_param_point(partition, [psi[j] / psi[i] for i, j in partition.boundary])
        value = energy(point)
        if not is_equipartition(point, eq_tol) or abs(value - report.value(n)) > eq_tol * max(1.0, value):
            logger.warning("eigenvector failed equipartition check index=%s", n)
            continue
        gradient = _projected_gradient(point)
        if gradient > GRADIENT_TOL:
            logger.warning("critical point rejected index=%s projected_gradient=%.3e", n, gradient)
            continue
        found.append(
            CriticalPoint(
                point=point,
                eigenvector=psi,
                eigen_index=n,
                energy=value,
                nu=partition.nu,
                deficiency=n - partition.nu,
                projected_gradient=gradient,
            )
        )
    logger.debug("critical points located nu=%s count=%s", partition.nu, len(found))
    return found


def _component_masses(partition: Partition, psi: np.ndarray) -> np.ndarray:
    squared = psi**2 / float(psi @ psi)
    return np.array([squared[list(vertices)].sum() for vertices in partition.components])


def lagrange_certificate(critical: CriticalPoint, *, tol: float = CERTIFICATE_TOL) -> tuple[float, ...]:
    point = critical.point
    partition = point.partition
    psi = critical.eigenvector / np.linalg.norm(critical.eigenvector)
    c = _component_masses(partition, psi)
    states = ground_states(point)
    labels = partition.labels

    for (i, j), a in point.items():
        left = c[labels[i]] * states[labels[i]].vector[i] ** 2
        right = c[labels[j]] * states[labels[j]].vector[j] ** 2 / a**2
        if abs(left - right) > tol * max(1.0, left, right):
            raise CertificateFailure(detail=f"stationarity violated on edge {(i, j)} by {abs(left - right):.3e}")

    rebuilt = sum(np.sqrt(c[k]) * states[k].vector for k in range(partition.nu))
    defect = float(np.abs(rebuilt - psi).max())
    if defect > tol:
        raise CertificateFailure(detail=f"eigenvector reconstruction defect {defect:.3e}")
    return tuple(float(v) for v in c)


class _ManifoldChart:
    """Local coordinates on E_P: t ↦ retraction of α^c + V t along the normal space."""

    def __init__(self, critical: CriticalPoint):
        self.partition = critical.point.partition
        self.center = critical.point.as_array()
        self.tangent = tangent_basis(critical.point)
        self.normal = normal_basis(critical.point)
        self.weights = _component_masses(self.partition, critical.eigenvector)
        self.scale = max(1.0, critical.energy)

    def lagrangian(self, t: np.ndarray) -> float:
        start = self.center + self.tangent @ t
        if np.any(start <= 0):
            raise RetractionFailure(offset=t, detail="tangent step leaves the positive orthant")
        try:
            point, _ = project_to_equipartition(
                self.partition, start, directions=self.normal, eq_tol=RETRACTION_TOL
            )
            alpha = point.alpha
        except NoConvergence as exc:
            if not exc.alpha or exc.residual > 1e-10 * self.scale:
                raise RetractionFailure(offset=t, detail=str(exc)) from exc
            alpha = exc.alpha
        except SpectralPartitionError as exc:
            raise RetractionFailure(offset=t, detail=str(exc)) from exc
        return float(self.weights @ phi(ParamPoint(partition=self.partition, alpha=alpha)))

    def hessian(self, h: float) -> np.ndarray:
        d = self.tangent.shape[1]
        f0 = self.lagrangian(np.zeros(d))
        hess = np.zeros((d, d))
        basis = np.eye(d) * h
        for a in range(d):
            hess[a, a] = (self.lagrangian(basis[a]) - 2.0 * f0 + self.lagrangian(-basis[a])) / h**2
            for b in range(a + 1, d):
                value = (
                    self.lagrangian(basis[a] + basis[b])
                    - self.lagrangian(basis[a] - basis[b])
                    - self.lagrangian(-basis[a] + basis[b])
                    + self.lagrangian(-basis[a] - basis[b])
                ) / (4.0 * h**2)
                hess[a, b] = hess[b, a] = value
        return hess


def morse_index(
    critical: CriticalPoint,
    *,
    h: float | None = None,
    step_scale: float = HESSIAN_STEP,
    hess_rel_tol: float = HESSIAN_REL_TOL,
) -> tuple[int, np.ndarray]:
    """Count negative eigenvalues of the Hessian of Λ restricted to E_P at a critical point.

    Central second differences at step h and h/2 are combined by Richardson
    extrapolation; their disagreement sets the noise floor of the tolerance.
    Without an explicit h the step is step_scale·(1 + max α).
    """
    partition = critical.point.partition
    if betti_number(partition) == 0:
        raise NoTangentDirections("tree partition: the equipartition set is a single point")
    chart = _ManifoldChart(critical)
    if chart.tangent.shape[1] == 0:
        raise NoTangentDirections("equipartition set has no tangent directions at this point")

    step = h if h is not None else step_scale * (1.0 + float(np.abs(chart.center).max()))
    coarse = chart.hessian(step)
    fine = chart.hessian(step / 2.0)
    hess = (4.0 * fine - coarse) / 3.0
    eigenvalues = scipy.linalg.eigvalsh(hess)
    tolerance = max(hess_rel_tol * float(np.abs(eigenvalues).max()), 10.0 * float(np.abs(coarse - fine).max()))
    for value in eigenvalues:
        if abs(value) <= tolerance:
            raise DegenerateHessian(eigenvalue=float(value), tolerance=tolerance)
    index = int(np.sum(eigenvalues < -tolerance))
    logger.debug("morse index computed index=%s dimension=%s tolerance=%.3e", index, len(eigenvalues), tolerance)
    return index, eigenvalues


def with_morse(critical: CriticalPoint, **kwargs: float) -> CriticalPoint:
    index, eigenvalues = morse_index(critical, **kwargs)
    return replace(critical, morse_index=index, hessian_eigenvalues=tuple(float(v) for v in eigenvalues))


def single_edge_operator(base: np.ndarray, signature: Signature, edge: Edge, alpha: float) -> np.ndarray:
    """base + w·[[α, σ], [σ, 1/α]] on (i, j); the (i, j) coupling of a signed Laplacian cancels."""
    if alpha == 0.0:
        raise ZeroAlpha("single-edge perturbation needs alpha != 0")
    i, j = edge
    w = signature.graph.weight(i, j)
    s = signature.sigma(i, j)
    operator = base.copy()
    operator[np.ix_((i, j), (i, j))] += w * np.array([[alpha, s], [s, 1.0 / alpha]])
    return operator


def interlacing_bounds(signature: Signature, edge: Sequence[int], alpha: float) -> InterlacingReport:
    key = canonical_edge(int(edge[0]), int(edge[1]))
    base = signed_laplacian(signature.graph, signature)
    before = scipy.linalg.eigvalsh(base)
    after = scipy.linalg.eigvalsh(single_edge_operator(base, signature, key, alpha))
    if alpha > 0:
        lower = after - before
        upper = before[1:] - after[:-1]
    else:
        lower = after[1:] - before[:-1]
        upper = before - after
    return InterlacingReport(edge=key, alpha=float(alpha), lower_slack=lower, upper_slack=upper)


class _Curve:
    def __init__(self, signature: Signature, base: np.ndarray, edge: Edge, index: int, gap_rel: float):
        self.signature = signature
        self.base = base
        self.edge = edge
        self.index = index
        self.gap_rel = gap_rel
        self.weight = signature.graph.weight(*edge)

    def eigenpair(self, alpha: float) -> tuple[float, np.ndarray, bool]:
        values, vectors = scipy.linalg.eigh(single_edge_operator(self.base, self.signature, self.edge, alpha))
        k = self.index - 1
        scale = max(1.0, float(np.abs(values).max()))
        below = values[k] - values[k - 1] if k > 0 else np.inf
        above = values[k + 1] - values[k] if k + 1 < len(values) else np.inf
        return float(values[k]), vectors[:, k], bool(min(below, above) > self.gap_rel * scale)

    def derivative(self, alpha: float) -> float:
        _, psi, _ = self.eigenpair(alpha)
        i, j = self.edge
        return self.weight * (psi[i] ** 2 - psi[j] ** 2 / alpha**2)

    def classify(self, alpha: float) -> tuple[Extremum, float]:
        delta = 1e-3 * abs(alpha)
        centre, _, _ = self.eigenpair(alpha)
        second = self.eigenpair(alpha + delta)[0] - 2.0 * centre + self.eigenpair(alpha - delta)[0]
        tolerance = 1e-11 * max(1.0, abs(centre))
        if second < -tolerance:
            return "max", second
        if second > tolerance:
            return "min", second
        return "ambiguous", second

    def refine(self, low: float, high: float) -> float:
        d_low = self.derivative(low)
        while abs(high - low) > CURVE_ROOT_TOL * max(1.0, abs(low)):
            mid = 0.5 * (low + high)
            d_mid = self.derivative(mid)
            if d_mid == 0.0:
                return mid
            if (d_mid > 0) == (d_low > 0):
                low, d_low = mid, d_mid
            else:
                high = mid
        return 0.5 * (low + high)


def edge_curve(
    signature: Signature,
    edge: Sequence[int],
    m: int,
    alpha_grid: Sequence[float],
    *,
    gap_rel: float = DEFAULT_GAP_REL,
) -> EdgeCurve:
    """Sample λ_m of the single-edge perturbation over α and locate its critical points.

    Kernel-branch points (α^c = −σ_ij ψ_j/ψ_i, which is ψ_j/ψ_i on a negative edge)
    carry an eigenvector of the unperturbed signed Laplacian; for those the index
    shift Δm and the maximum flag M are recorded.
    """
    key = canonical_edge(int(edge[0]), int(edge[1]))
    graph = signature.graph
    if not graph.has_edge(*key):
        raise ValueError(f"{key} is not an edge of the graph")
    if not 1 <= m <= graph.vertex_count:
        raise ValueError(f"eigen-index {m} outside 1..{graph.vertex_count}")
    grid = np.array(sorted(float(a) for a in alpha_grid))
    if np.any(grid == 0.0):
        raise ZeroAlpha("alpha grid contains 0")

    base = signed_laplacian(graph, signature)
    base_report = eigendecompose(base, gap_rel=gap_rel)
    curve = _Curve(signature, base, key, m, gap_rel)
    samples = [curve.eigenpair(a) for a in grid]
    values = np.array([s[0] for s in samples])
    derivatives = np.array([curve.derivative(a) for a in grid])

    excluded: list[tuple[float, float]] = []
    roots: list[float] = []
    usable = 0
    for k in range(len(grid) - 1):
        low, high = grid[k], grid[k + 1]
        if low < 0 < high:
            continue
        if not (samples[k][2] and samples[k + 1][2]):
            excluded.append((float(low), float(high)))
            continue
        usable += 1
        if derivatives[k] == 0.0:
            roots.append(float(low))
        elif derivatives[k] * derivatives[k + 1] < 0:
            root = curve.refine(float(low), float(high))
            slope = max(abs(derivatives[k]), abs(derivatives[k + 1]))
            # a sign change without a vanishing derivative is an eigenvalue crossing
            if not curve.eigenpair(root)[2] or abs(curve.derivative(root)) > KINK_TOL * slope:
                excluded.append((float(low), float(high)))
                continue
            roots.append(root)
    if len(grid) > 1 and usable == 0:
        raise DegenerateSegment(low=float(grid[0]), high=float(grid[-1]))

    sigma = signature.sigma(*key)
    i, j = key
    located: list[CurveCritical] = []
    for root in roots:
        value, psi, _ = curve.eigenpair(root)
        kind, _ = curve.classify(root)
        ratio = psi[j] / psi[i] if psi[i] != 0 else np.inf
        tolerance = BRANCH_TOL * max(1.0, abs(root))
        if abs(root + sigma * ratio) <= tolerance:
            branch: Literal["kernel", "mirror"] | None = "kernel"
        elif abs(root - sigma * ratio) <= tolerance:
            branch = "mirror"
        else:
            branch = None
            logger.warning("curve critical point off both branches edge=%s alpha=%.12g", key, root)
        entry = CurveCritical(alpha=root, eigenvalue=value, kind=kind, branch=branch)
        if branch == "kernel":
            entry = replace(entry, base_residual=float(np.linalg.norm(base @ psi - value * psi)))
            n = eigen_index_by_overlap(base_report, psi)
            if n is not None and kind != "ambiguous":
                entry = replace(entry, base_index=n, index_shift=n - m, maximum_flag=1 if kind == "max" else 0)
        located.append(entry)

    logger.debug("edge curve sampled edge=%s index=%s critical=%s", key, m, len(located))
    return EdgeCurve(
        edge=key,
        index=m,
        grid=grid,
        values=values,
        excluded_segments=tuple(excluded),
        critical_points=tuple(located),
    )


def cycle_breaking_edges(partition: Partition) -> tuple[Edge, ...]:
    """Boundary edges outside a spanning tree of the partition multigraph, boundary order."""
    forest = nx.utils.UnionFind(range(partition.nu))
    removed: list[Edge] = []
    for i, j in partition.boundary:
        k, l = partition.labels[i], partition.labels[j]
        if forest[k] == forest[l]:
            removed.append((i, j))
        else:
            forest.union(k, l)
    return tuple(removed)


def deficiency_via_edge_restoration(critical: CriticalPoint, *, gap_rel: float = DEFAULT_GAP_REL) -> RestorationReport:
    point = critical.point
    partition = point.partition
    removed = cycle_breaking_edges(partition)
    if not removed:
        return RestorationReport(
            removed_edges=(),
            start_index=partition.nu,
            maximum_flags=(),
            predicted_index=partition.nu,
            actual_index=critical.eigen_index,
        )

    signature = boundary_signature(partition)
    operator = partition_laplacian(partition)
    for edge in removed:
        operator = single_edge_operator(operator, signature, edge, point.value(*edge))
    psi = critical.eigenvector
    start = eigen_index_by_overlap(eigendecompose(operator, gap_rel=gap_rel), psi)
    if start is None:
        raise ClassificationAmbiguous(
            edge=removed[0], detail="eigenvector is not simple once the cycle-breaking edges are cut"
        )
    if start != partition.nu:
        logger.warning("tree-stage index differs start=%s nu=%s", start, partition.nu)

    flags: list[int] = []
    current = operator
    for edge in removed:
        i, j = edge
        w = partition.graph.weight(i, j)
        a = point.value(i, j)
        restored = current - single_edge_operator(np.zeros_like(current), signature, edge, a)
        index = eigen_index_by_overlap(eigendecompose(current, gap_rel=gap_rel), psi)
        if index is None:
            raise ClassificationAmbiguous(edge=edge, detail="eigenvector is not simple at this restoration stage")
        curve = _Curve(signature, restored, edge, index, gap_rel)
        kind, second = curve.classify(a)
        if kind == "ambiguous":
            raise ClassificationAmbiguous(edge=edge, second_difference=second)
        flags.append(1 if kind == "max" else 0)
        logger.debug("edge restored edge=%s weight=%.6g kind=%s", edge, w, kind)
        current = restored

    return RestorationReport(
        removed_edges=removed,
        start_index=start,
        maximum_flags=tuple(flags),
        predicted_index=start + sum(flags),
        actual_index=critical.eigen_index,
    )
