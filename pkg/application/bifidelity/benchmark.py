from __future__ import annotations

import logging
import time
from dataclasses import dataclass

import numpy as np
import pandas as pd

from application.bifidelity.events import ProgressCallback, ProgressTracker
from application.bifidelity.offline import BifidStore, problem_manifest
from application.bifidelity.online import online_reconstruct, store_grids
from application.bifidelity.sampling import SampleBounds, random_sample_points
from application.fdsolver.grid import GridSpec
from application.fdsolver.moments import moments
from application.fdsolver.scheme import solve
from application.fdsolver.stability import stability_bound
from application.sgsystem.problem import ProblemTemplate, build_problem
from constants import BenchmarkColumns
from infrastructure.storage.bifid_store import check_store_matches
from infrastructure.storage.tables import build_frame
from utils.exceptions import NonParabolicError, NumericalRejectionError

logger = logging.getLogger(__name__)

SUMMARY_MODEL = -1
PHASES = ("high_solve", "high_moments", "low_solve", "projection", "combination", "bifid_moments")
MAX_REDRAWS = 1000


@dataclass(frozen=True)
class BenchmarkReport:
    """Per-model table with a summary row.

    ``phase_seconds`` holds the mean wall time of each phase of the direct
    and the bi-fidelity evaluation.
    """

    table: pd.DataFrame
    summary: dict
    phase_seconds: dict[str, float]


def _admissible(template: ProblemTemplate, coefficients: np.ndarray, grids: tuple[GridSpec, ...]) -> bool:
    try:
        problem = build_problem(
            template.model_from_coefficients(coefficients),
            template.option,
            template.tensor,
            template.index_set,
        )
    except NonParabolicError:
        return False
    return all(stability_bound(problem, grid).stable for grid in grids)


def draw_models(
    count: int,
    rng: np.random.Generator,
    bounds: SampleBounds,
    template: ProblemTemplate,
    grids: tuple[GridSpec, ...],
) -> np.ndarray:
    """Random admissible coefficient triples, redrawing rejected ones."""
    models = []
    redraws = 0
    while len(models) < int(count):
        candidate = random_sample_points(1, rng, bounds).points[0]
        if _admissible(template, candidate, grids):
            models.append(candidate)
            continue
        redraws += 1
        if redraws > MAX_REDRAWS:
            raise NumericalRejectionError(f"No admissible model after {MAX_REDRAWS} draws")
    if redraws:
        logger.info(f"[draw_models] {redraws} inadmissible draws replaced")
    return np.array(models).reshape(-1, 3)


def _errors(reference: np.ndarray, approximation: np.ndarray, near_strike: np.ndarray) -> tuple[float, float, float]:
    difference = np.abs(reference - approximation)
    return (
        float(np.max(difference)),
        float(np.mean(difference)),
        float(np.mean(difference[:, near_strike])) if near_strike.any() else np.nan,
    )


def run_benchmark(
    store: BifidStore,
    template: ProblemTemplate,
    models: int,
    seed: int,
    bounds: SampleBounds,
    near_strike_band: float = 0.2,
    progress: ProgressCallback | None = None,
) -> BenchmarkReport:
    """Direct high-fidelity solves against bi-fidelity reconstructions."""
    low_grid, high_grid = store_grids(store)
    check_store_matches(store, problem_manifest(template, low_grid, high_grid))
    rng = np.random.default_rng(seed)
    coefficients = draw_models(models, rng, bounds, template, (low_grid, high_grid))

    strike = template.option.strike
    rows = {name: [] for name in BenchmarkColumns.get_all_names()}
    phases: dict[str, list[float]] = {name: [] for name in PHASES}
    tracker = ProgressTracker(len(coefficients), progress, stage="benchmark")
    for number, point in enumerate(coefficients):
        problem = template.build(template.model_from_coefficients(point))
        started = time.perf_counter()
        direct_field = solve(problem, high_grid)
        solved = time.perf_counter()
        direct = moments(direct_field)
        high_seconds = time.perf_counter() - started
        phases["high_solve"].append(solved - started)
        phases["high_moments"].append(high_seconds - (solved - started))

        started = time.perf_counter()
        reconstruction = online_reconstruct(store, point, template, low_grid, check_manifest=False)
        reconstructed = time.perf_counter()
        approximate = moments(reconstruction.field)
        bifid_seconds = time.perf_counter() - started
        for name, seconds in reconstruction.phase_seconds().items():
            phases[name].append(seconds)
        phases["bifid_moments"].append(bifid_seconds - (reconstructed - started))

        near_strike = np.abs(direct.S - strike) <= near_strike_band * strike
        mean_errors = _errors(direct.mean, approximate.mean, near_strike)
        variance_errors = _errors(direct.variance, approximate.variance, near_strike)
        values = (
            number,
            *point.tolist(),
            *mean_errors,
            *variance_errors,
            reconstruction.residual,
            high_seconds,
            bifid_seconds,
            high_seconds / bifid_seconds if bifid_seconds > 0 else np.nan,
        )
        for column, value in zip(BenchmarkColumns, values):
            rows[column.name].append(value)
        tracker.advance()

    table = build_frame(BenchmarkColumns, rows)
    summary_values = {name: float(table[name].mean()) for name in BenchmarkColumns.get_all_names()}
    summary_values[BenchmarkColumns.MODEL.name] = SUMMARY_MODEL
    summary_values[BenchmarkColumns.SPEEDUP.name] = (
        summary_values[BenchmarkColumns.HIGH_SECONDS.name]
        / summary_values[BenchmarkColumns.BIFID_SECONDS.name]
    )
    table = pd.concat([table, build_frame(BenchmarkColumns, {k: [v] for k, v in summary_values.items()})], ignore_index=True)
    phase_seconds = {name: float(np.mean(values)) for name, values in phases.items()}
    logger.info(
        f"[run_benchmark] {len(coefficients)} models, mean speedup "
        f"{summary_values[BenchmarkColumns.SPEEDUP.name]:.2f}"
    )
    logger.info(
        "[run_benchmark] mean phase times: "
        + ", ".join(f"{name} {seconds:.4f} s" for name, seconds in phase_seconds.items())
    )
    return BenchmarkReport(table=table, summary=summary_values, phase_seconds=phase_seconds)
