from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Protocol, Sequence

import numpy as np
import scipy.linalg
import scipy.optimize

from .graph_core import Edge, Partition, SpectralPartitionError
from .signed import boundary_signature, partition_laplacian
from .spectral import (
    DEFAULT_GAP_REL,
    DEFAULT_ZERO_TOL,
    ConvergenceFailure,
    DegenerateEigenvector,
    eigen_index_by_overlap,
    eigendecompose,
    has_zero_entries,
    nodal_report,
)


logger = logging.getLogger(__name__)


DEFAULT_EQ_TOL = 1e-10
DEFAULT_NEWTON_MAX_ITER = 100
ALPHA_FLOOR = 1e-12
LOG_ALPHA_BOUND = 10.0
ARMIJO_C1 = 1e-4
MIN_STEP = 1e-10


class ZeroAlpha(SpectralPartitionError):
    pass


class DegenerateBlock(SpectralPartitionError):
    def __init__(self, *, component: int, gap: float):
        super().__init__(f"ground state of component {component} is not simple (gap {gap:.3e})")
        self.component = component
        self.gap = gap


class WrongNodalPartition(SpectralPartitionError):
    def __init__(self, *, expected: tuple[int, ...], found: tuple[int, ...]):
        super().__init__(f"nodal partition {list(found)} differs from {list(expected)}")
        self.expected = expected
        self.found = found


class NoConvergence(SpectralPartitionError):
    def __init__(self, *, iterations: int, residual: float, alpha: tuple[float, ...] = ()):
        super().__init__(f"equipartition solve stopped after {iterations} iterations (residual {residual:.3e})")
        self.iterations = iterations
        self.residual = residual
        self.alpha = alpha


class LeftPositiveOrthant(SpectralPartitionError):
    def __init__(self, *, edge: Edge, value: float):
        super().__init__(f"alpha on edge {edge} left the positive orthant (value {value!r})")
        self.edge = edge
        self.value = value


@dataclass(frozen=True, eq=False)
class ParamPoint:
    """Boundary parameters α, one per edge of ``partition.boundary`` in that order.

    For a boundary edge (i, j) with i < j the potential w·α sits on vertex i and w/α on vertex j.
    """

    partition: Partition
    alpha: tuple[float, ...]

    def as_array(self) -> np.ndarray:
        return np.array(self.alpha, dtype=float)

    def value(self, i: int, j: int) -> float:
        return self.alpha[self.partition.boundary_index[(min(i, j), max(i, j))]]

    def items(self) -> list[tuple[Edge, float]]:
        return list(zip(self.partition.boundary, self.alpha))

    @property
    def is_positive(self) -> bool:
        return all(a > 0 for a in self.alpha)


@dataclass(frozen=True, eq=False)
class ComponentGroundState:
    component: int
    vertices: tuple[int, ...]
    eigenvalue: float
    vector: np.ndarray
    gap: float


@dataclass(frozen=True)
class TransversalityReport:
    nu: int
    augmented_rank: int
    cokernel_dimension: int
    cokernel_single_signed: bool | None

    @property
    def transversal(self) -> bool:
        return self.augmented_rank == self.nu


@dataclass(frozen=True, eq=False)
class EnergyMinimum:
    point: ParamPoint | None
    energy: float
    starts: int
    equipartition: bool


class UniformSource(Protocol):
    def uniform(self, low: float, high: float) -> float: ...


def make_param_point(partition: Partition, alpha: Sequence[float]) -> ParamPoint:
    values = tuple(float(a) for a in alpha)
    if len(values) != len(partition.boundary):
        raise ValueError(f"expected {len(partition.boundary)} alpha values, got {len(values)}")
    for edge, a in zip(partition.boundary, values):
        if a == 0.0:
            raise ZeroAlpha(f"alpha on boundary edge {edge} is zero")
    return ParamPoint(partition=partition, alpha=values)


def unit_point(partition: Partition) -> ParamPoint:
    return ParamPoint(partition=partition, alpha=(1.0,) * len(partition.boundary))


def edge_perturbation(alpha: float) -> np.ndarray:
    if alpha == 0.0:
        raise ZeroAlpha("edge perturbation needs alpha != 0")
    return np.array([[alpha, -1.0], [-1.0, 1.0 / alpha]])


def perturbed_operator(point: ParamPoint) -> np.ndarray:
    partition = point.partition
    operator = partition_laplacian(partition)
    for (i, j), a in zip(partition.boundary, point.alpha):
        block = partition.graph.weight(i, j) * edge_perturbation(a)
        operator[np.ix_((i, j), (i, j))] += block
    return operator


def ground_states(point: ParamPoint) -> list[ComponentGroundState]:
    partition = point.partition
    operator = perturbed_operator(point)
    n = partition.graph.vertex_count
    states: list[ComponentGroundState] = []
    for k, vertices in enumerate(partition.components):
        block = operator[np.ix_(vertices, vertices)]
        try:
            values, vectors = scipy.linalg.eigh(block)
        except np.linalg.LinAlgError as exc:
            raise ConvergenceFailure(detail=f"component {k}: {exc}") from exc
        f = vectors[:, 0]
        if f.sum() < 0:
            f = -f
        extended = np.zeros(n)
        extended[list(vertices)] = f
        gap = float(values[1] - values[0]) if len(values) > 1 else np.inf
        states.append(
            ComponentGroundState(
                component=k,
                vertices=vertices,
                eigenvalue=float(values[0]),
                vector=extended,
                gap=gap,
            )
        )
    return states


def phi(point: ParamPoint) -> np.ndarray:
    return np.array([state.eigenvalue for state in ground_states(point)])


def energy(point: ParamPoint) -> float:
    return float(phi(point).max())


def _spread_ok(values: np.ndarray, eq_tol: float) -> bool:
    return float(np.ptp(values)) <= eq_tol * max(1.0, float(values.max()))


def is_equipartition(point: ParamPoint, eq_tol: float = DEFAULT_EQ_TOL) -> bool:
    return _spread_ok(phi(point), eq_tol)


def _jacobian_from_states(point: ParamPoint, states: list[ComponentGroundState], gap_rel: float) -> np.ndarray:
    partition = point.partition
    scale = max(1.0, max(abs(s.eigenvalue) for s in states))
    for state in states:
        if state.gap <= gap_rel * scale:
            raise DegenerateBlock(component=state.component, gap=state.gap)
    jac = np.zeros((partition.nu, len(partition.boundary)))
    labels = partition.labels
    for col, ((i, j), a) in enumerate(zip(partition.boundary, point.alpha)):
        w = partition.graph.weight(i, j)
        jac[labels[i], col] += w * states[labels[i]].vector[i] ** 2
        jac[labels[j], col] -= w * states[labels[j]].vector[j] ** 2 / a**2
    return jac


def phi_jacobian(point: ParamPoint, *, gap_rel: float = DEFAULT_GAP_REL) -> np.ndarray:
    """Analytic dΦ: column (i,j) holds w·f_i² in row s(i) and −w·f_j²/α² in row s(j)."""
    return _jacobian_from_states(point, ground_states(point), gap_rel)


def diagonal_projector(nu: int) -> np.ndarray:
    return np.eye(nu) - np.full((nu, nu), 1.0 / nu)


def tangent_basis(point: ParamPoint) -> np.ndarray:
    """Orthonormal basis (columns) of the kernel of Q·dΦ, the tangent space of E_P."""
    jac = diagonal_projector(point.partition.nu) @ phi_jacobian(point)
    return scipy.linalg.null_space(jac)


def normal_basis(point: ParamPoint) -> np.ndarray:
    jac = diagonal_projector(point.partition.nu) @ phi_jacobian(point)
    if not jac.size:
        return np.zeros((jac.shape[1], 0))
    return scipy.linalg.orth(jac.T)


def transversality(point: ParamPoint, *, rank_tol: float = 1e-8) -> TransversalityReport:
    jac = phi_jacobian(point)
    nu = point.partition.nu
    augmented = np.hstack([np.ones((nu, 1)), jac])
    singular = scipy.linalg.svdvals(augmented)
    rank = int(np.sum(singular > rank_tol * max(1.0, float(singular.max(initial=0.0)))))
    cokernel = scipy.linalg.null_space(jac.T, rcond=rank_tol) if jac.size else np.eye(nu)
    single_signed = None
    if cokernel.shape[1] == 1:
        u = cokernel[:, 0]
        single_signed = bool(np.all(u > 0) or np.all(u < 0))
    return TransversalityReport(
        nu=nu,
        augmented_rank=rank,
        cokernel_dimension=int(cokernel.shape[1]),
        cokernel_single_signed=single_signed,
    )


def alpha_from_eigenvector(
    partition: Partition,
    psi: np.ndarray,
    *,
    zero_tol: float = DEFAULT_ZERO_TOL,
    gap_rel: float = DEFAULT_GAP_REL,
) -> ParamPoint:
    """α̃_ij = ψ_j/ψ_i for a non-degenerate eigenvector ψ of L^∂P whose nodal partition is P."""
    psi = np.asarray(psi, dtype=float)
    if has_zero_entries(psi, zero_tol):
        raise DegenerateEigenvector(reason="vector has zero entries")
    report = eigendecompose(partition_laplacian(partition), gap_rel=gap_rel)
    if eigen_index_by_overlap(report, psi) is None:
        raise DegenerateEigenvector(reason="not a simple eigenvector of the partition Laplacian")
    nodal = nodal_report(boundary_signature(partition), psi, zero_tol=zero_tol)
    if nodal.domain_labels != partition.labels:
        raise WrongNodalPartition(expected=partition.labels, found=nodal.domain_labels)
    return make_param_point(partition, [psi[j] / psi[i] for i, j in partition.boundary])


def _residual(values: np.ndarray) -> np.ndarray:
    return values - values.mean()


def project_to_equipartition(
    partition: Partition,
    alpha0: Sequence[float],
    *,
    directions: np.ndarray | None = None,
    eq_tol: float = DEFAULT_EQ_TOL,
    max_iter: int = DEFAULT_NEWTON_MAX_ITER,
) -> tuple[ParamPoint, int]:
    """Damped Gauss-Newton on r(α) = Φ(α) − mean Φ(α).

    Steps are minimum-norm least-squares solutions restricted to the span of
    ``directions`` (all of ℝ^|∂P| when None), halved until α stays positive and
    ‖r‖² satisfies an Armijo decrease. Returns the point and the iteration count.
    """
    point = make_param_point(partition, alpha0)
    if not point.is_positive:
        edge, value = next((e, a) for e, a in point.items() if a <= 0)
        raise LeftPositiveOrthant(edge=edge, value=value)
    if partition.nu == 1 or not partition.boundary:
        return point, 0

    projector = diagonal_projector(partition.nu)
    basis = np.eye(len(partition.boundary)) if directions is None else np.asarray(directions, dtype=float)
    alpha = point.as_array()
    states = ground_states(point)
    values = np.array([s.eigenvalue for s in states])
    r = _residual(values)
    merit = float(r @ r)

    for iteration in range(max_iter + 1):
        if _spread_ok(values, eq_tol):
            logger.debug("equipartition projection converged iterations=%s residual=%.3e", iteration, np.ptp(values))
            return point, iteration
        if iteration == max_iter:
            break
        jac = projector @ _jacobian_from_states(point, states, DEFAULT_GAP_REL) @ basis
        coeffs, *_ = scipy.linalg.lstsq(jac, -r)
        step = basis @ coeffs

        t = 1.0
        while True:
            trial = alpha + t * step
            if np.all(trial > 0):
                trial_point = ParamPoint(partition=partition, alpha=tuple(float(a) for a in trial))
                trial_states = ground_states(trial_point)
                trial_values = np.array([s.eigenvalue for s in trial_states])
                trial_r = _residual(trial_values)
                trial_merit = float(trial_r @ trial_r)
                if trial_merit <= merit * (1.0 - 2.0 * ARMIJO_C1 * t):
                    break
            t *= 0.5
            if t < MIN_STEP:
                raise NoConvergence(iterations=iteration, residual=float(np.ptp(values)), alpha=point.alpha)

        alpha, point, states, values, r, merit = trial, trial_point, trial_states, trial_values, trial_r, trial_merit
        for edge, a in point.items():
            if a < ALPHA_FLOOR or a > 1.0 / ALPHA_FLOOR:
                raise LeftPositiveOrthant(edge=edge, value=a)

    raise NoConvergence(iterations=max_iter, residual=float(np.ptp(values)), alpha=point.alpha)


def solve_equipartition(
    partition: Partition,
    alpha0: Sequence[float],
    *,
    eq_tol: float = DEFAULT_EQ_TOL,
    max_iter: int = DEFAULT_NEWTON_MAX_ITER,
) -> ParamPoint:
    point, iterations = project_to_equipartition(partition, alpha0, eq_tol=eq_tol, max_iter=max_iter)
    logger.debug("equipartition solved iterations=%s energy=%.12g", iterations, energy(point))
    return point


def minimize_energy(
    partition: Partition,
    *,
    rng: UniformSource | None = None,
    starts: int = 16,
    extra_starts: Sequence[Sequence[float]] = (),
    eq_tol: float = DEFAULT_EQ_TOL,
    max_iter: int = DEFAULT_NEWTON_MAX_ITER,
) -> EnergyMinimum:
    """Multistart estimate of inf over α > 0 of Λ(P, α).

    Each start runs SLSQP on the epigraph form (minimize t subject to t ≥ Φ_k)
    in log α, then the best point is polished by an equipartition solve. Every
    value reported is Λ at an actual α, so the estimate never undershoots the inf.
    """
    m = len(partition.boundary)
    if m == 0:
        point = unit_point(partition)
        return EnergyMinimum(point=point, energy=energy(point), starts=0, equipartition=True)

    def _point(x: np.ndarray) -> ParamPoint:
        return ParamPoint(partition=partition, alpha=tuple(float(v) for v in np.exp(x)))

    def _constraint(z: np.ndarray) -> np.ndarray:
        return z[-1] - phi(_point(z[:-1]))

    def _constraint_jac(z: np.ndarray) -> np.ndarray:
        point = _point(z[:-1])
        dphi = phi_jacobian(point, gap_rel=0.0) * point.as_array()[None, :]
        return np.hstack([-dphi, np.ones((partition.nu, 1))])

    initial: list[np.ndarray] = [np.zeros(m)]
    initial.extend(np.log(np.asarray(a, dtype=float)) for a in extra_starts)
    if rng is not None:
        for _ in range(max(0, starts - 1)):
            initial.append(np.array([rng.uniform(-2.0, 2.0) for _ in range(m)]))

    best_x: np.ndarray | None = None
    best_energy = np.inf
    for x0 in initial:
        x0 = np.clip(x0, -LOG_ALPHA_BOUND, LOG_ALPHA_BOUND)
        candidate = x0
        try:
            z0 = np.append(x0, phi(_point(x0)).max())
            result = scipy.optimize.minimize(
                lambda z: z[-1],
                z0,
                jac=lambda z: np.append(np.zeros(m), 1.0),
                method="SLSQP",
                bounds=[(-LOG_ALPHA_BOUND, LOG_ALPHA_BOUND)] * m + [(None, None)],
                constraints=[{"type": "ineq", "fun": _constraint, "jac": _constraint_jac}],
                options={"maxiter": 200, "ftol": 1e-13},
            )
            candidate = np.clip(result.x[:-1], -LOG_ALPHA_BOUND, LOG_ALPHA_BOUND)
        except (SpectralPartitionError, ValueError) as exc:
            logger.info("energy minimization start failed error=%s", exc)
        for x in (x0, candidate):
            value = energy(_point(x))
            if value < best_energy:
                best_energy, best_x = value, x

    assert best_x is not None
    best_point = _point(best_x)
    try:
        polished = solve_equipartition(partition, best_point.alpha, eq_tol=eq_tol, max_iter=max_iter)
        polished_energy = energy(polished)
        if polished_energy <= best_energy:
            best_point, best_energy = polished, polished_energy
    except SpectralPartitionError as exc:
        logger.info("energy polish skipped error=%s", exc)

    logger.debug("energy minimized starts=%s energy=%.12g", len(initial), best_energy)
    return EnergyMinimum(
        point=best_point,
        energy=float(best_energy),
        starts=len(initial),
        equipartition=is_equipartition(best_point, max(eq_tol, 1e-8)),
    )
