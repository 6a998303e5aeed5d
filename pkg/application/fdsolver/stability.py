from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from application.fdsolver.grid import GridSpec
from application.sgsystem.problem import TransformedProblem
from utils.exceptions import ConfigurationError, NumericalCorruptionError

logger = logging.getLogger(__name__)

RADIUS_TOLERANCE = 1e-9


@dataclass(frozen=True)
class StabilityReport:
    stable: bool
    lambda_max: float
    dtau_max: float
    cfl: float
    row_sum_bounded: bool
    admissible_n_tau: int
    spectral_radius: float | None = None

    def to_record(self) -> dict:
        return {
            "stable": self.stable,
            "lambda_max": self.lambda_max,
            "dtau_max": self.dtau_max if np.isfinite(self.dtau_max) else None,
            "cfl": self.cfl,
            "row_sum_bounded": self.row_sum_bounded,
            "admissible_n_tau": self.admissible_n_tau,
            "spectral_radius": self.spectral_radius,
        }


def _mode_coefficients(problem: TransformedProblem, grid: GridSpec, eigenvalue: float):
    zeta = grid.zeta()[1:-1]
    d_tau = grid.d_tau(problem.maturity_years)
    d_zeta = grid.d_zeta
    s = problem.diffusion(zeta) * eigenvalue * d_tau / d_zeta**2
    p = problem.drift(zeta) * d_tau / (2.0 * d_zeta)
    q = -problem.reaction(zeta) * d_tau
    return s, p, q


def _row_sums_bounded(problem: TransformedProblem, grid: GridSpec, eigenvalues) -> bool:
    for eigenvalue in eigenvalues:
        s, p, q = _mode_coefficients(problem, grid, eigenvalue)
        row_sum = np.abs(1.0 - 2.0 * s - q) + np.abs(s + p) + np.abs(s - p)
        if np.any(row_sum > 1.0 + 1e-14):
            return False
    return True


def _mode_matrix(problem: TransformedProblem, grid: GridSpec, eigenvalue: float) -> np.ndarray:
    s, p, q = _mode_coefficients(problem, grid, eigenvalue)
    matrix = np.diag(1.0 - 2.0 * s - q)
    matrix += np.diag((s + p)[:-1], 1)
    matrix += np.diag((s - p)[1:], -1)
    return matrix


def _coupling_eigenvalues(problem: TransformedProblem) -> np.ndarray:
    try:
        return np.linalg.eigvalsh(problem.A)
    except np.linalg.LinAlgError as e:
        raise NumericalCorruptionError(f"Eigenvalue computation failed: {e}") from None


def _power_radius(problem: TransformedProblem, grid: GridSpec, iterations: int, seed: int) -> float:
    A = problem.A
    zeta = grid.zeta()[1:-1]
    d_tau = grid.d_tau(problem.maturity_years)
    d_zeta = grid.d_zeta
    diffusion = (problem.diffusion(zeta) * d_tau / d_zeta**2)[:, None]
    drift = (problem.drift(zeta) * d_tau / (2.0 * d_zeta))[:, None]
    reaction = (problem.reaction(zeta) * d_tau)[:, None]

    def apply(interior: np.ndarray) -> np.ndarray:
        padded = np.zeros((interior.shape[0] + 2, interior.shape[1]))
        padded[1:-1] = interior
        second = padded[2:] - 2.0 * interior + padded[:-2]
        first = padded[2:] - padded[:-2]
        return interior + diffusion * (second @ A.T) + drift * first + reaction * interior

    rng = np.random.default_rng(seed)
    vector = rng.standard_normal((zeta.size, problem.size))
    vector /= np.linalg.norm(vector)
    estimate = 0.0
    for _ in range(iterations):
        image = apply(vector)
        norm = float(np.linalg.norm(image))
        if norm == 0.0:
            return 0.0
        estimate = norm
        vector = image / norm
    return estimate


def spectral_radius(
    problem: TransformedProblem,
    grid: GridSpec,
    method: str = "eig",
    iterations: int = 2000,
    seed: int = 0,
) -> float:
    """Spectral radius of the homogeneous one-step update on interior nodes.

    "eig" diagonalizes A and takes the exact eigenvalues of each decoupled
    tridiagonal block; "power" iterates the full operator matrix-free.
    """
    if method == "power":
        return _power_radius(problem, grid, iterations, seed)
    if method != "eig":
        raise ConfigurationError(f"Unknown spectral radius method '{method}'")
    radius = 0.0
    for eigenvalue in np.unique(np.round(_coupling_eigenvalues(problem), 14)):
        block = _mode_matrix(problem, grid, float(eigenvalue))
        radius = max(radius, float(np.max(np.abs(np.linalg.eigvals(block)))))
    return radius


def stability_bound(
    problem: TransformedProblem,
    grid: GridSpec,
    empirical: bool = True,
) -> StabilityReport:
    """Sufficient condition dtau * (lambda_max * max zeta^2 (1-zeta)^2 / dzeta^2 + r) <= 1.

    Where the row-sum bound of the scalar mode updates does not hold
    (drift dominating diffusion near the boundaries), the exact spectral
    radius of the update decides.
    """
    eigenvalues = _coupling_eigenvalues(problem)
    lambda_max = max(float(eigenvalues[-1]), 0.0)
    zeta = grid.zeta()
    weight = float(np.max(zeta**2 * (1.0 - zeta) ** 2))
    rate = abs(problem.rate)
    denominator = lambda_max * weight / grid.d_zeta**2 + rate
    dtau_max = 1.0 / denominator if denominator > 0 else np.inf
    d_tau = grid.d_tau(problem.maturity_years)
    cfl = d_tau * denominator
    admissible_n_tau = 1 if not np.isfinite(dtau_max) else max(1, int(np.ceil(problem.maturity_years / dtau_max)))

    row_sum_bounded = _row_sums_bounded(problem, grid, [eigenvalues[0], eigenvalues[-1]])
    radius = None
    stable = cfl <= 1.0
    if stable and not row_sum_bounded and empirical:
        radius = spectral_radius(problem, grid)
        stable = radius <= 1.0 + RADIUS_TOLERANCE
    elif stable and not row_sum_bounded:
        stable = False

    report = StabilityReport(
        stable=bool(stable),
        lambda_max=lambda_max,
        dtau_max=float(dtau_max),
        cfl=float(cfl),
        row_sum_bounded=row_sum_bounded,
        admissible_n_tau=admissible_n_tau,
        spectral_radius=radius,
    )
    logger.debug(f"[stability_bound] {report}")
    return report
