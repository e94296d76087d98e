from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass
from typing import Literal, Protocol, Sequence

import numpy as np
import scipy.linalg

from .critical import critical_points_from_spectrum
from .gf2 import ChainSpace, solve
from .graph_core import CapExceeded, Edge, Partition, SpectralPartitionError, make_partition
from .param_partition import (
    DEFAULT_EQ_TOL,
    ParamPoint,
    alpha_from_eigenvector,
    energy,
    ground_states,
    minimize_energy,
    perturbed_operator,
)
from .signed import (
    Signature,
    conjugate_by_switching,
    make_switching,
    signed_laplacian,
    switching_equivalent,
)
from .spectral import (
    DEFAULT_GAP_REL,
    DEFAULT_ZERO_TOL,
    DegenerateEigenvector,
    SpectrumReport,
    eigendecompose,
    is_nondegenerate,
    nodal_report,
)


logger = logging.getLogger(__name__)


DEFAULT_SUBSET_CAP = 20
EQUALITY_SLACK = 1e-8
TIE_REL = 1e-10


class NotInClass(SpectralPartitionError):
    def __init__(self, *, gamma: Sequence[Edge], labels: Sequence[int]):
        super().__init__(f"partition {list(labels)} is not in the class of negative edge set {sorted(gamma)}")
        self.gamma = tuple(sorted(gamma))
        self.labels = tuple(labels)


class NodalSetNotBoundary(SpectralPartitionError):
    def __init__(self, *, interior_edges: Sequence[Edge]):
        super().__init__(
            f"nodal set is not a partition boundary: edges {sorted(interior_edges)} lie inside a nodal domain"
        )
        self.interior_edges = tuple(sorted(interior_edges))


class UniformSource(Protocol):
    def uniform(self, low: float, high: float) -> float: ...


@dataclass(frozen=True, eq=False)
class BoundReport:
    gamma: tuple[Edge, ...]
    labels: tuple[int, ...]
    lambda_nu: float
    inf_energy_estimate: float
    slack: float
    equality_case: bool
    witness_subset: tuple[Edge, ...]
    best_point: ParamPoint | None


@dataclass(frozen=True, eq=False)
class SignedEquipartition:
    partition: Partition
    point: ParamPoint
    energy: float
    eigenvalue: float


@dataclass(frozen=True, eq=False)
class RayleighCertificate:
    test_vector: np.ndarray
    quotient: float
    lambda_nu: float
    energy: float
    remainder_min_eigenvalue: float

    @property
    def holds(self) -> bool:
        scale = max(1.0, abs(self.energy))
        return (
            self.lambda_nu <= self.quotient + 1e-9 * scale
            and self.quotient <= self.energy + 1e-9 * scale
            and self.remainder_min_eigenvalue >= -1e-9 * scale
        )


def homologous(first: Signature, second: Signature) -> bool:
    """Γ1 and Γ2 are homologous iff Γ1 Δ Γ2 lies in the cut space."""
    chains = ChainSpace(first.graph)
    return chains.in_cut_space(chains.vector(first.negative_edges ^ second.negative_edges))


def _membership_gf2(partition: Partition, gamma: Signature) -> frozenset[Edge] | None:
    # x_i + x_j = Γ_e on every internal edge; then Γ ⊕ δx vanishes off ∂P
    graph = partition.graph
    equations = [
        ((1 << i) | (1 << j), 1 if (i, j) in gamma.negative_edges else 0)
        for i, j in graph.edge_keys
        if partition.labels[i] == partition.labels[j]
    ]
    x = solve(equations, graph.vertex_count)
    if x is None:
        return None
    chains = ChainSpace(graph)
    side = [v for v in range(graph.vertex_count) if (x >> v) & 1]
    return frozenset(chains.edges(chains.vector(gamma.negative_edges) ^ chains.coboundary(side)))


def _membership_enumerate(partition: Partition, gamma: Signature, subset_cap: int) -> frozenset[Edge] | None:
    boundary = partition.boundary
    if len(boundary) > subset_cap:
        raise CapExceeded(what="boundary_size", size=len(boundary), cap=subset_cap)
    for size in range(len(boundary) + 1):
        for subset in itertools.combinations(boundary, size):
            candidate = Signature(graph=partition.graph, negative_edges=frozenset(subset))
            if homologous(gamma, candidate):
                return candidate.negative_edges
    return None


def partition_class_membership(
    partition: Partition,
    gamma: Signature,
    *,
    method: Literal["gf2", "enumerate"] = "gf2",
    subset_cap: int = DEFAULT_SUBSET_CAP,
) -> frozenset[Edge] | None:
    """A subset Γ̃ ⊆ ∂P with σ^Γ switching equivalent to σ^Γ̃, or None."""
    if method == "gf2":
        return _membership_gf2(partition, gamma)
    if method == "enumerate":
        return _membership_enumerate(partition, gamma, subset_cap)
    raise ValueError(f"unknown membership method {method!r}")


def lambda_nu(gamma: Signature, nu: int) -> float:
    values = scipy.linalg.eigvalsh(signed_laplacian(gamma.graph, gamma))
    return float(values[nu - 1])


def lower_bound_check(
    gamma: Signature,
    partition: Partition,
    *,
    rng: UniformSource | None = None,
    starts: int = 16,
    eq_tol: float = DEFAULT_EQ_TOL,
    zero_tol: float = DEFAULT_ZERO_TOL,
    gap_rel: float = DEFAULT_GAP_REL,
) -> BoundReport:
    """Compare λ_ν(Γ) with a multistart estimate of inf Λ(P, ·) for P in the class of Γ."""
    witness = partition_class_membership(partition, gamma)
    if witness is None:
        raise NotInClass(gamma=tuple(gamma.negative_edges), labels=partition.labels)

    nu = partition.nu
    report = eigendecompose(signed_laplacian(gamma.graph, gamma), gap_rel=gap_rel)
    bound = report.value(nu)
    critical = critical_points_from_spectrum(partition, zero_tol=zero_tol, gap_rel=gap_rel, eq_tol=eq_tol)
    seeds = [cp.point.alpha for cp in critical]
    minimum = minimize_energy(partition, rng=rng, starts=starts, extra_starts=seeds, eq_tol=eq_tol)
    slack = minimum.energy - bound

    equality = False
    if slack <= EQUALITY_SLACK * max(1.0, abs(bound)):
        equality = _is_nodal_partition_at(gamma, report, nu, partition, zero_tol)
    if slack < -1e-9 * max(1.0, abs(bound)):
        logger.warning("lower bound violated slack=%.3e nu=%s", slack, nu)
    logger.debug("lower bound checked nu=%s lambda=%.12g estimate=%.12g", nu, bound, minimum.energy)
    return BoundReport(
        gamma=tuple(sorted(gamma.negative_edges)),
        labels=partition.labels,
        lambda_nu=bound,
        inf_energy_estimate=minimum.energy,
        slack=slack,
        equality_case=equality,
        witness_subset=tuple(sorted(witness)),
        best_point=minimum.point,
    )


def _is_nodal_partition_at(gamma: Signature, report: SpectrumReport, nu: int, partition: Partition, zero_tol: float) -> bool:
    """Whether P is the nodal partition of an eigenvector of L^Γ for the eigenvalue λ_ν(Γ)."""
    target = report.value(nu)
    scale = max(1.0, abs(target))
    matches = [n for n in range(1, report.size + 1) if abs(report.value(n) - target) <= 1e-8 * scale]
    if len(matches) != 1 or not is_nondegenerate(report, matches[0], zero_tol):
        logger.info("equality case undecided eigenvalue multiplicity=%s", len(matches))
        return False
    nodal = nodal_report(gamma, report.vector(matches[0]), zero_tol=zero_tol)
    return nodal.domain_labels == partition.labels


def maximize_lower_bound(
    partition: Partition,
    *,
    subset_cap: int = DEFAULT_SUBSET_CAP,
) -> tuple[frozenset[Edge], float]:
    """max over Γ ⊆ ∂P of λ_ν(Γ); ties prefer the larger Γ, then the lexicographically smaller one."""
    boundary = partition.boundary
    if len(boundary) > subset_cap:
        raise CapExceeded(what="boundary_size", size=len(boundary), cap=subset_cap)
    nu = partition.nu
    best: tuple[Edge, ...] = ()
    best_value = -np.inf
    for size in range(len(boundary) + 1):
        for subset in itertools.combinations(boundary, size):
            value = lambda_nu(Signature(graph=partition.graph, negative_edges=frozenset(subset)), nu)
            tie = TIE_REL * max(1.0, abs(value), abs(best_value) if np.isfinite(best_value) else 0.0)
            if value > best_value + tie:
                best, best_value = subset, value
            elif abs(value - best_value) <= tie:
                if len(subset) > len(best) or (len(subset) == len(best) and sorted(subset) < sorted(best)):
                    best = subset
    logger.debug("lower bound maximized nu=%s subsets=%s value=%.12g", nu, 2 ** len(boundary), best_value)
    return frozenset(best), float(best_value)


def equipartition_from_signed_eigenvector(
    gamma: Signature,
    psi: np.ndarray,
    *,
    zero_tol: float = DEFAULT_ZERO_TOL,
    gap_rel: float = DEFAULT_GAP_REL,
) -> SignedEquipartition:
    """The nodal partition of a non-degenerate L^Γ eigenvector with the equipartition it induces."""
    psi = np.asarray(psi, dtype=float)
    operator = signed_laplacian(gamma.graph, gamma)
    eigenvalue = float(psi @ operator @ psi / (psi @ psi))
    nodal = nodal_report(gamma, psi, zero_tol=zero_tol)
    if nodal.degenerate:
        raise DegenerateEigenvector(reason=f"zero entries at {list(nodal.zero_vertices)}")
    partition = make_partition(gamma.graph, nodal.domain_labels)
    # edges between domains are always nodal, but a nodal edge can also join two vertices of one domain
    interior = set(nodal.nodal_set) - partition.boundary_set
    if interior:
        raise NodalSetNotBoundary(interior_edges=interior)
    # τ = sign(ψ) turns Γ into ∂P and ψ into |ψ|
    tau = make_switching(np.where(psi > 0, 1, -1))
    switched = tau.vector * psi
    point = alpha_from_eigenvector(partition, switched, zero_tol=zero_tol, gap_rel=gap_rel)
    return SignedEquipartition(partition=partition, point=point, energy=energy(point), eigenvalue=eigenvalue)


def rayleigh_certificate(
    gamma: Signature,
    point: ParamPoint,
    witness: frozenset[Edge],
) -> RayleighCertificate:
    """Test vector for min-max: λ_ν(Γ) ≤ R(u) ≤ Λ(P, α).

    u combines the component ground states, orthogonal to the first ν−1
    eigenvectors of L^Γ̃ and switched back to Γ. L^∂P(P, α) − L^Γ̃ is a sum of
    rank-one PSD edge blocks, whose smallest eigenvalue is reported.
    """
    partition = point.partition
    nu = partition.nu
    graph = partition.graph
    tilde = Signature(graph=graph, negative_edges=witness)
    tau = switching_equivalent(tilde, gamma)
    if tau is None:
        raise NotInClass(gamma=tuple(gamma.negative_edges), labels=partition.labels)

    tilde_operator = signed_laplacian(graph, tilde)
    _, vectors = scipy.linalg.eigh(tilde_operator)
    states = ground_states(point)
    basis = np.column_stack([s.vector for s in states])
    weights = scipy.linalg.null_space(vectors[:, : nu - 1].T @ basis) if nu > 1 else np.ones((1, 1))
    u = basis @ weights[:, 0]
    u /= np.linalg.norm(u)

    remainder = perturbed_operator(point) - tilde_operator
    test_vector = tau.vector * u
    gamma_operator = conjugate_by_switching(tilde_operator, tau)
    return RayleighCertificate(
        test_vector=test_vector,
        quotient=float(test_vector @ gamma_operator @ test_vector),
        lambda_nu=lambda_nu(gamma, nu),
        energy=energy(point),
        remainder_min_eigenvalue=float(scipy.linalg.eigvalsh(remainder)[0]),
    )
