from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from application.fdsolver.grid import GridSpec
from application.fdsolver.stability import StabilityReport, stability_bound
from application.sgsystem.problem import TransformedProblem
from utils.exceptions import UnstableSchemeError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SolutionField:
    """Coefficients v[level, m, delta] at the stored time levels."""

    coeffs: np.ndarray
    grid: GridSpec
    problem: TransformedProblem
    steps: np.ndarray
    stability: StabilityReport | None = None

    @property
    def zeta(self) -> np.ndarray:
        return self.grid.zeta()

    @property
    def tau(self) -> np.ndarray:
        return self.steps * self.grid.d_tau(self.problem.maturity_years)

    @property
    def levels(self) -> int:
        return self.coeffs.shape[0]

    def flatten(self) -> np.ndarray:
        """Time-major, then zeta, then coefficient index."""
        return np.ascontiguousarray(self.coeffs).reshape(-1)

    def with_coeffs(self, coeffs: np.ndarray) -> "SolutionField":
        return SolutionField(
            coeffs=np.asarray(coeffs, dtype=float).reshape(self.coeffs.shape),
            grid=self.grid,
            problem=self.problem,
            steps=self.steps,
            stability=self.stability,
        )


def _step(
    values: np.ndarray,
    A_T: np.ndarray,
    diffusion: np.ndarray,
    drift: np.ndarray,
    reaction: np.ndarray,
) -> np.ndarray:
    interior = values[1:-1]
    second = values[2:] - 2.0 * interior + values[:-2]
    first = values[2:] - values[:-2]
    return interior + diffusion * (second @ A_T) + drift * first + reaction * interior


def solve(
    problem: TransformedProblem,
    grid: GridSpec,
    allow_unstable: bool = False,
    out: np.ndarray | None = None,
) -> SolutionField:
    """March the explicit scheme forward in tau from the payoff.

    out, if given, receives the stored levels and must have shape
    (stored levels, m_zeta + 1, basis size).
    """
    report = stability_bound(problem, grid)
    if not report.stable:
        message = (
            f"Explicit scheme unstable with n_tau={grid.n_tau} "
            f"(cfl {report.cfl:.4f}, dtau_max {report.dtau_max:.6e}); "
            f"use n_tau >= {report.admissible_n_tau}"
        )
        if not allow_unstable:
            raise UnstableSchemeError(message, report.admissible_n_tau)
        logger.warning(f"[solve] {message}; continuing on override")

    zeta = grid.zeta()
    d_tau = grid.d_tau(problem.maturity_years)
    d_zeta = grid.d_zeta
    interior_zeta = zeta[1:-1]
    diffusion = (problem.diffusion(interior_zeta) * d_tau / d_zeta**2)[:, None]
    drift = (problem.drift(interior_zeta) * d_tau / (2.0 * d_zeta))[:, None]
    reaction = (problem.reaction(interior_zeta) * d_tau)[:, None]
    A_T = np.ascontiguousarray(problem.A.T)
    lower = problem.lower_boundary()
    upper = problem.upper_boundary()

    steps = grid.stored_steps()
    shape = (steps.size, zeta.size, problem.size)
    if out is None:
        out = np.empty(shape)
    elif out.shape != shape:
        raise ValueError(f"Output buffer has shape {out.shape}, expected {shape}")

    values = problem.initial_value(zeta)
    values[0] = lower
    values[-1] = upper
    out[0] = values
    next_level = 1
    for step in range(1, grid.n_tau + 1):
        updated = _step(values, A_T, diffusion, drift, reaction)
        if not np.all(np.isfinite(updated)):
            raise UnstableSchemeError(
                f"Non-finite values at time step {step} of {grid.n_tau}",
                report.admissible_n_tau,
            )
        values[1:-1] = updated
        values[0] = lower
        values[-1] = upper
        if next_level < steps.size and steps[next_level] == step:
            out[next_level] = values
            next_level += 1

    logger.debug(
        f"[solve] m_zeta={grid.m_zeta} n_tau={grid.n_tau} basis={problem.size}: "
        f"{steps.size} levels stored"
    )
    return SolutionField(coeffs=out, grid=grid, problem=problem, steps=steps, stability=report)
