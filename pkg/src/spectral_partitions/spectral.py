from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Protocol

import networkx as nx
import numpy as np
import scipy.linalg

from .graph_core import Edge, Partition, SpectralPartitionError, WeightedGraph, make_partition
from .signed import Signature, signed_laplacian


logger = logging.getLogger(__name__)


DEFAULT_ZERO_TOL = 1e-9
DEFAULT_GAP_REL = 1e-8
RESIDUAL_REL = 1e-9
OVERLAP_TOL = 1e-6


class ConvergenceFailure(SpectralPartitionError):
    def __init__(self, *, detail: str):
        super().__init__(f"eigensolver failed: {detail}")
        self.detail = detail


class AllZeroVector(SpectralPartitionError):
    pass


class DegenerateEigenvector(SpectralPartitionError):
    def __init__(self, *, reason: str):
        super().__init__(f"eigenvector is degenerate: {reason}")
        self.reason = reason


class CourantViolation(SpectralPartitionError):
    def __init__(self, *, index: int, nodal_count: int):
        super().__init__(f"eigenvector {index} has {nodal_count} nodal domains (> {index})")
        self.index = index
        self.nodal_count = nodal_count


@dataclass(frozen=True, eq=False)
class SpectrumReport:
    """Ascending eigenvalues with orthonormal, sign-fixed eigenvectors (columns).

    Eigen-indices are 1-based throughout the package: ``vector(n)`` is ψ^(n).
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    gaps: np.ndarray
    operator_norm: float
    gap_tol: float

    @property
    def size(self) -> int:
        return len(self.eigenvalues)

    def value(self, n: int) -> float:
        return float(self.eigenvalues[n - 1])

    def vector(self, n: int) -> np.ndarray:
        return self.eigenvectors[:, n - 1]

    def is_simple(self, n: int) -> bool:
        return bool(self.gaps[n - 1] > self.gap_tol)


@dataclass(frozen=True)
class NodalReport:
    nodal_set: tuple[Edge, ...]
    domain_labels: tuple[int, ...]
    domain_count: int
    zero_vertices: tuple[int, ...]
    eigen_index: int | None
    deficiency: int | None

    @property
    def degenerate(self) -> bool:
        return bool(self.zero_vertices)


@dataclass(frozen=True)
class CourantRow:
    index: int
    nodal_count: int
    deficiency: int


class UniformSource(Protocol):
    def uniform(self, low: float, high: float) -> float: ...


def _fix_signs(vectors: np.ndarray) -> np.ndarray:
    fixed = vectors.copy()
    for col in range(fixed.shape[1]):
        pivot = int(np.argmax(np.abs(fixed[:, col])))
        if fixed[pivot, col] < 0:
            fixed[:, col] = -fixed[:, col]
    return fixed


def _simplicity_gaps(values: np.ndarray) -> np.ndarray:
    gaps = np.full(len(values), np.inf)
    if len(values) > 1:
        diffs = np.diff(values)
        gaps[:-1] = np.minimum(gaps[:-1], diffs)
        gaps[1:] = np.minimum(gaps[1:], diffs)
    return gaps


def eigendecompose(operator: np.ndarray, *, gap_rel: float = DEFAULT_GAP_REL) -> SpectrumReport:
    matrix = np.asarray(operator, dtype=float)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise ValueError(f"operator must be square, got shape {matrix.shape}")
    if not np.allclose(matrix, matrix.T, rtol=0.0, atol=1e-12 * max(1.0, np.abs(matrix).max(initial=0.0))):
        raise ValueError("operator is not symmetric")
    try:
        values, vectors = scipy.linalg.eigh(matrix)
    except (np.linalg.LinAlgError, scipy.linalg.LinAlgError) as exc:
        raise ConvergenceFailure(detail=str(exc)) from exc

    vectors = _fix_signs(vectors)
    norm = float(np.linalg.norm(matrix, 2)) if matrix.size else 0.0
    scale = max(norm, np.finfo(float).tiny)
    residual = float(np.abs(matrix @ vectors - vectors * values).max(initial=0.0))
    if residual > RESIDUAL_REL * scale and residual > 1e-300:
        raise ConvergenceFailure(detail=f"residual {residual:.3e} exceeds {RESIDUAL_REL * scale:.3e}")
    orth = float(np.abs(vectors.T @ vectors - np.eye(len(values))).max(initial=0.0))
    if orth > RESIDUAL_REL:
        raise ConvergenceFailure(detail=f"eigenvectors not orthonormal (defect {orth:.3e})")

    logger.debug("eigendecompose size=%s norm=%.3e residual=%.3e", len(values), norm, residual)
    return SpectrumReport(
        eigenvalues=values,
        eigenvectors=vectors,
        gaps=_simplicity_gaps(values),
        operator_norm=norm,
        gap_tol=gap_rel * norm,
    )


def signature_spectrum(signature: Signature, *, gap_rel: float = DEFAULT_GAP_REL) -> SpectrumReport:
    return eigendecompose(signed_laplacian(signature.graph, signature), gap_rel=gap_rel)


def has_zero_entries(u: np.ndarray, zero_tol: float = DEFAULT_ZERO_TOL) -> bool:
    scale = float(np.abs(u).max(initial=0.0))
    return bool(np.any(np.abs(u) <= zero_tol * scale))


def is_nondegenerate(report: SpectrumReport, index: int, zero_tol: float = DEFAULT_ZERO_TOL) -> bool:
    return report.is_simple(index) and not has_zero_entries(report.vector(index), zero_tol)


def eigen_index_by_overlap(report: SpectrumReport, u: np.ndarray) -> int | None:
    """1-based index of the eigenvector best aligned with u, or None when no single one is."""
    norm = float(np.linalg.norm(u))
    if norm == 0.0:
        raise AllZeroVector("cannot locate the zero vector in a spectrum")
    overlaps = np.abs(report.eigenvectors.T @ (u / norm))
    best = int(np.argmax(overlaps))
    if overlaps[best] < 1.0 - OVERLAP_TOL or not report.is_simple(best + 1):
        return None
    return best + 1


def nodal_report(
    signature: Signature,
    u: np.ndarray,
    eigen_index: int | None = None,
    *,
    zero_tol: float = DEFAULT_ZERO_TOL,
) -> NodalReport:
    graph = signature.graph
    u = np.asarray(u, dtype=float)
    scale = float(np.abs(u).max(initial=0.0))
    if scale == 0.0:
        raise AllZeroVector("nodal report of the zero vector")
    zero = {i for i in range(graph.vertex_count) if abs(u[i]) <= zero_tol * scale}

    nodal: list[Edge] = []
    kept = nx.Graph()
    kept.add_nodes_from(i for i in range(graph.vertex_count) if i not in zero)
    for i, j in graph.edge_keys:
        if i in zero or j in zero:
            continue
        if u[i] * signature.sigma(i, j) * u[j] < 0:
            nodal.append((i, j))
        else:
            kept.add_edge(i, j)

    labels = [-1] * graph.vertex_count
    count = 0
    for vertex in range(graph.vertex_count):
        if vertex in zero or labels[vertex] >= 0:
            continue
        for member in nx.node_connected_component(kept, vertex):
            labels[member] = count
        count += 1

    deficiency = None
    if eigen_index is not None and not zero:
        deficiency = eigen_index - count
    if zero:
        logger.info("nodal report has zero vertices count=%s", len(zero))
    return NodalReport(
        nodal_set=tuple(nodal),
        domain_labels=tuple(labels),
        domain_count=count,
        zero_vertices=tuple(sorted(zero)),
        eigen_index=eigen_index,
        deficiency=deficiency,
    )


def nodal_partition(signature: Signature, u: np.ndarray, *, zero_tol: float = DEFAULT_ZERO_TOL) -> Partition:
    """Partition whose components are the strong nodal domains of u; u must have no zero entries."""
    report = nodal_report(signature, u, zero_tol=zero_tol)
    if report.degenerate:
        raise DegenerateEigenvector(reason=f"zero entries at {list(report.zero_vertices)}")
    return make_partition(signature.graph, report.domain_labels)


def courant_check(
    signature: Signature,
    *,
    zero_tol: float = DEFAULT_ZERO_TOL,
    gap_rel: float = DEFAULT_GAP_REL,
) -> list[CourantRow]:
    report = signature_spectrum(signature, gap_rel=gap_rel)
    rows: list[CourantRow] = []
    for n in range(1, report.size + 1):
        if not is_nondegenerate(report, n, zero_tol):
            continue
        nodal = nodal_report(signature, report.vector(n), n, zero_tol=zero_tol)
        if nodal.domain_count > n:
            raise CourantViolation(index=n, nodal_count=nodal.domain_count)
        rows.append(CourantRow(index=n, nodal_count=nodal.domain_count, deficiency=n - nodal.domain_count))
    return rows


def jitter_weights(graph: WeightedGraph, rng: UniformSource, relative: float = 1e-6) -> WeightedGraph:
    if relative <= 0:
        raise ValueError("relative jitter must be > 0")
    weights = [w * (1.0 + relative * rng.uniform(-1.0, 1.0)) for w in graph.weights]
    return graph.with_weights(weights)
