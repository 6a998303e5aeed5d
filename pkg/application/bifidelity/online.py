from __future__ import annotations

import logging
import time
from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_solve

from application.bifidelity.offline import BifidStore, problem_manifest
from application.fdsolver.grid import GridSpec
from application.fdsolver.scheme import SolutionField, solve
from application.sgsystem.problem import ProblemTemplate
from infrastructure.storage.bifid_store import check_store_matches

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Reconstruction:
    field: SolutionField
    weights: np.ndarray
    residual: float
    exact_match: bool
    low_seconds: float
    projection_seconds: float
    combination_seconds: float
    total_seconds: float

    def phase_seconds(self) -> dict[str, float]:
        return {
            "low_solve": self.low_seconds,
            "projection": self.projection_seconds,
            "combination": self.combination_seconds,
        }


def store_grids(store: BifidStore) -> tuple[GridSpec, GridSpec]:
    low = store.manifest["low_grid"]
    high = store.manifest["high_grid"]
    return (
        GridSpec(low["m_zeta"], low["n_tau"], low["time_thinning"]),
        GridSpec(high["m_zeta"], high["n_tau"], high["time_thinning"]),
    )


def project(store: BifidStore, low: np.ndarray) -> tuple[np.ndarray, float]:
    """Least-squares weights of a low-fidelity snapshot on the stored ones, with the relative residual."""
    weights = cho_solve((store.gram_cholesky, True), store.low_snapshots @ low)
    norm = float(np.linalg.norm(low))
    residual = float(np.linalg.norm(low - weights @ store.low_snapshots) / norm) if norm > 0 else 0.0
    return weights, residual


def online_reconstruct(
    store: BifidStore,
    coefficients,
    template: ProblemTemplate,
    low_grid: GridSpec,
    check_manifest: bool = True,
) -> Reconstruction:
    """High-fidelity field at new coefficients from one low-fidelity solve.

    The low-fidelity solution is projected onto the span of the stored
    low-fidelity snapshots; the projection weights combine the matching
    high-fidelity snapshots.
    """
    started = time.perf_counter()
    _, high_grid = store_grids(store)
    if check_manifest:
        check_store_matches(store, problem_manifest(template, low_grid, high_grid))

    problem = template.build(template.model_from_coefficients(coefficients))
    low_started = time.perf_counter()
    low = solve(problem, low_grid).flatten()
    low_seconds = time.perf_counter() - low_started

    projection_started = time.perf_counter()
    exact = np.flatnonzero(np.all(store.low_snapshots == low, axis=1))
    if exact.size:
        weights = np.zeros(store.size)
        weights[exact[0]] = 1.0
        residual = 0.0
    else:
        weights, residual = project(store, low)
    projection_seconds = time.perf_counter() - projection_started

    combination_started = time.perf_counter()
    if exact.size:
        high = np.array(store.high_snapshots[exact[0]], dtype=float)
    else:
        high = weights @ store.high_snapshots
    combination_seconds = time.perf_counter() - combination_started

    shape = (high_grid.stored_steps().size, high_grid.m_zeta + 1, problem.size)
    field = SolutionField(
        coeffs=high.reshape(shape),
        grid=high_grid,
        problem=problem,
        steps=high_grid.stored_steps(),
    )
    total_seconds = time.perf_counter() - started
    logger.debug(
        f"[online_reconstruct] residual {residual:.3e}, exact {bool(exact.size)}, "
        f"{total_seconds:.3f} s"
    )
    return Reconstruction(
        field=field,
        weights=np.asarray(weights),
        residual=residual,
        exact_match=bool(exact.size),
        low_seconds=low_seconds,
        projection_seconds=projection_seconds,
        combination_seconds=combination_seconds,
        total_seconds=total_seconds,
    )
