"""Semi-implicit evolution of a polar contour towards a local energy minimum.

Each iteration freezes the map coefficients (beta, kappa and the gradient
of D) at the current vertices, then solves

    (A + gamma I) rho_next = gamma rho - g_ext

where A is the curvature matrix and g_ext the data plus balloon gradient.
Radii are clamped into ``[rho_floor, rho_max]`` after the solve.
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Tuple

import numpy as np
from scipy.linalg import lu_factor, lu_solve

from .contour_geometry import PolarContour, to_cartesian
from .energy_landscape import EnergyBreakdown, EnergyLandscape, energy_total, sample_bilinear
from .errors import ConfigError, NumericalFailure

logger = logging.getLogger(__name__)

TRACE_SCHEMA = "active-rays/trace"
TRACE_VERSION = 1

# Second-difference stencil for c_{j-1}, c_j, c_{j+1}.
_STENCIL = np.array([1.0, -2.0, 1.0])


@dataclass(frozen=True)
class SolverConfig:
    max_iters: int = 400
    step_gamma: float = 1.0
    tol_rho: float = 1e-3
    rho_floor: float = 0.5
    backtracking: bool = True
    max_halvings: int = 8

    def __post_init__(self):
        if self.max_iters < 1:
            raise ConfigError(f"max_iters must be >= 1, got {self.max_iters}")
        for name in ("step_gamma", "tol_rho", "rho_floor"):
            value = getattr(self, name)
            if not (np.isfinite(value) and value > 0):
                raise ConfigError(f"{name} must be positive and finite, got {value}")
        if self.max_halvings < 0:
            raise ConfigError(f"max_halvings must be >= 0, got {self.max_halvings}")


class SolverStatus(str, Enum):
    converged = "converged"
    max_iters = "max-iters"


@dataclass(frozen=True)
class IterationRecord:
    energy: EnergyBreakdown
    max_delta_rho: float
    mean_rho: float
    step_halvings: int
    clamped: int


@dataclass
class SolverTrace:
    initial_energy: EnergyBreakdown
    records: List[IterationRecord] = field(default_factory=list)
    status: SolverStatus = SolverStatus.max_iters

    def __len__(self) -> int:
        return len(self.records)

    @property
    def energies(self) -> np.ndarray:
        return np.array([record.energy.total for record in self.records])

    def to_dict(self) -> Dict[str, Any]:
        """Arrays per diagnostic; see the trace schema in the README."""
        return {
            "schema": TRACE_SCHEMA,
            "version": TRACE_VERSION,
            "status": self.status.value,
            "iterations": len(self.records),
            "initial_energy": self.initial_energy.total,
            "energy_total": [r.energy.total for r in self.records],
            "energy_data": [r.energy.data for r in self.records],
            "energy_curve": [r.energy.curve for r in self.records],
            "energy_balloon": [r.energy.balloon for r in self.records],
            "max_delta_rho": [r.max_delta_rho for r in self.records],
            "mean_rho": [r.mean_rho for r in self.records],
            "step_halvings": [r.step_halvings for r in self.records],
            "clamped": [r.clamped for r in self.records],
        }


def curvature_matrix(landscape: EnergyLandscape, contour: PolarContour) -> np.ndarray:
    """
    Matrix A of the curvature energy as a quadratic form in the radii.

    With beta frozen at the current vertices, 0.5 * rho^T A rho equals
    ``energy_curve``. A is symmetric, positive semi-definite and
    pentadiagonal with cyclic wraparound.
    """
    count = contour.num_vertices
    beta = sample_bilinear(landscape.beta, to_cartesian(contour))
    directions = contour.directions
    matrix = np.zeros((count, count))
    offsets = np.arange(-1, 2)
    for j in range(count):
        if beta[j] == 0.0:
            continue
        idx = (j + offsets) % count
        u = directions[idx]
        block = np.outer(_STENCIL, _STENCIL) * (u @ u.T)
        matrix[np.ix_(idx, idx)] += 2.0 * beta[j] * block
    return 0.5 * (matrix + matrix.T)


def _external_gradient(landscape: EnergyLandscape, contour: PolarContour) -> np.ndarray:
    """Data plus balloon part of dE/drho with frozen coefficients."""
    points = to_cartesian(contour)
    directions = contour.directions
    grad_x = sample_bilinear(landscape.grad_D_x, points)
    grad_y = sample_bilinear(landscape.grad_D_y, points)
    kappa = sample_bilinear(landscape.kappa, points)
    g_data = grad_x * directions[:, 0] + grad_y * directions[:, 1]
    g_balloon = -kappa / contour.rho_max
    return g_data + g_balloon


def gradient_rho(landscape: EnergyLandscape, contour: PolarContour) -> np.ndarray:
    """
    dE/drho_i for every ray under the frozen-coefficient convention.

    This is the exact gradient of ``frozen_energy`` anchored at ``contour``.
    """
    matrix = curvature_matrix(landscape, contour)
    return _external_gradient(landscape, contour) + matrix @ contour.radii


def frozen_energy(landscape: EnergyLandscape, anchor: PolarContour, radii: np.ndarray) -> float:
    """
    Energy with every map coefficient frozen at the anchor contour.

    D is replaced by its first-order expansion (anchor value plus sampled
    central-difference gradient along each ray), beta by its anchor samples
    in the curvature quadratic form, kappa by its anchor samples.
    """
    radii = np.asarray(radii, dtype=np.float64)
    points = to_cartesian(anchor)
    directions = anchor.directions
    d0 = sample_bilinear(landscape.D, points)
    slope = (sample_bilinear(landscape.grad_D_x, points) * directions[:, 0]
             + sample_bilinear(landscape.grad_D_y, points) * directions[:, 1])
    kappa = sample_bilinear(landscape.kappa, points)
    matrix = curvature_matrix(landscape, anchor)

    data = np.sum(d0 + slope * (radii - anchor.radii))
    curve = 0.5 * radii @ matrix @ radii
    balloon = np.sum(kappa * (1.0 - radii / anchor.rho_max))
    return float(data + curve + balloon)


def _solve(matrix: np.ndarray, gamma: float, radii: np.ndarray, g_ext: np.ndarray) -> np.ndarray:
    system = matrix + gamma * np.eye(radii.size)
    return lu_solve(lu_factor(system), gamma * radii - g_ext)


def semi_implicit_step(landscape: EnergyLandscape, contour: PolarContour, gamma: float) -> np.ndarray:
    """One unclamped solve of (A + gamma I) rho' = gamma rho - g_ext."""
    matrix = curvature_matrix(landscape, contour)
    return _solve(matrix, gamma, contour.radii, _external_gradient(landscape, contour))


def _check_finite(energy: EnergyBreakdown, trace: SolverTrace, iteration: int):
    if not np.all(np.isfinite(energy)):
        raise NumericalFailure(f"non-finite energy at iteration {iteration}", trace)


def evolve(
    landscape: EnergyLandscape,
    init: PolarContour,
    config: SolverConfig = SolverConfig(),
) -> Tuple[PolarContour, SolverTrace]:
    """
    Evolve ``init`` until the largest radius change drops below tol_rho.

    With backtracking, a step that raises the total energy is retried with
    gamma doubled (half the step) up to ``max_halvings`` times and the
    lowest-energy candidate is taken. When even that candidate does not
    descend, the current contour is kept and the run ends as converged.

    Returns:
        Final contour and the per-iteration trace

    Raises:
        NumericalFailure: If radii or energy become NaN/inf; the exception
            carries the trace up to that point
    """
    contour = init
    energy = energy_total(landscape, contour)
    trace = SolverTrace(initial_energy=energy)
    _check_finite(energy, trace, 0)
    lower = np.minimum(config.rho_floor, init.rho_max)

    for iteration in range(1, config.max_iters + 1):
        matrix = curvature_matrix(landscape, contour)
        g_ext = _external_gradient(landscape, contour)
        gamma = config.step_gamma
        best = None
        halvings = 0
        while True:
            proposal = _solve(matrix, gamma, contour.radii, g_ext)
            if not np.all(np.isfinite(proposal)):
                raise NumericalFailure(f"non-finite radii at iteration {iteration}", trace)
            clipped = np.clip(proposal, lower, contour.rho_max)
            candidate = contour.with_radii(clipped)
            candidate_energy = energy_total(landscape, candidate)
            _check_finite(candidate_energy, trace, iteration)
            clamped = int(np.count_nonzero(clipped != proposal))
            if best is None or candidate_energy.total < best[1].total:
                best = (candidate, candidate_energy, halvings, clamped)
            if (not config.backtracking or candidate_energy.total <= energy.total
                    or halvings == config.max_halvings):
                break
            gamma *= 2.0
            halvings += 1

        candidate, candidate_energy, used_halvings, clamped = best
        if config.backtracking and candidate_energy.total > energy.total:
            logger.warning(
                "no descent after %d step halvings at iteration %d; keeping current contour",
                halvings, iteration,
            )
            trace.status = SolverStatus.converged
            break

        delta = float(np.max(np.abs(candidate.radii - contour.radii)))
        trace.records.append(IterationRecord(
            energy=candidate_energy,
            max_delta_rho=delta,
            mean_rho=float(np.mean(candidate.radii)),
            step_halvings=used_halvings,
            clamped=clamped,
        ))
        logger.debug(
            "iter %d: E=%.6g (data %.6g, curve %.6g, balloon %.6g) max|drho|=%.3g halvings=%d",
            iteration, candidate_energy.total, candidate_energy.data, candidate_energy.curve,
            candidate_energy.balloon, delta, used_halvings,
        )
        contour, energy = candidate, candidate_energy
        if delta < config.tol_rho:
            trace.status = SolverStatus.converged
            break

    logger.info("evolution finished: %s after %d iterations (E=%.6g)",
                trace.status.value, len(trace), energy.total)
    return contour, trace
