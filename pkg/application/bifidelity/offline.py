from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import LinAlgError, cholesky

from application.bifidelity.events import ProgressCallback, ProgressTracker
from application.bifidelity.sampling import SampleGrid
from application.bifidelity.selection import select_points
from application.bifidelity.sweep import offline_sweep
from application.fdsolver.grid import GridSpec
from application.fdsolver.scheme import solve
from application.fdsolver.stability import stability_bound
from application.sgsystem.problem import ProblemTemplate, build_problem
from constants import FORMAT_VERSION
from infrastructure.parallel import map_ordered
from utils.exceptions import UnstableSchemeError

logger = logging.getLogger(__name__)

GRAM_JITTER = 1e-12


@dataclass
class BifidStore:
    manifest: dict
    points: np.ndarray
    low_snapshots: np.ndarray
    high_snapshots: np.ndarray
    gram: np.ndarray
    gram_cholesky: np.ndarray
    rejected: list[dict] = field(default_factory=list)

    @property
    def size(self) -> int:
        return int(self.points.shape[0])


def problem_manifest(template: ProblemTemplate, low_grid: GridSpec, high_grid: GridSpec) -> dict:
    """Part of a store manifest that a matching run must reproduce."""
    return {
        **template.to_record(),
        "low_grid": low_grid.to_record(),
        "high_grid": high_grid.to_record(),
    }


def gram_factor(low_snapshots: np.ndarray) -> tuple[np.ndarray, np.ndarray, float]:
    """Gram matrix of the rows, its lower Cholesky factor and the jitter used."""
    gram = low_snapshots @ low_snapshots.T
    gram = 0.5 * (gram + gram.T)
    try:
        return gram, cholesky(gram, lower=True), 0.0
    except LinAlgError:
        jitter = GRAM_JITTER * float(np.trace(gram)) / gram.shape[0]
        logger.warning(f"[gram_factor] Gram matrix not positive definite, adding jitter {jitter:.3e}")
        return gram, cholesky(gram + jitter * np.eye(gram.shape[0]), lower=True), jitter


def offline_highfid(
    points: np.ndarray,
    low_snapshots: np.ndarray,
    template: ProblemTemplate,
    low_grid: GridSpec,
    high_grid: GridSpec,
    workers: int = 1,
    progress: ProgressCallback | None = None,
    extra_manifest: dict | None = None,
) -> BifidStore:
    points = np.atleast_2d(np.asarray(points, dtype=float))
    problems = [
        build_problem(template.model_from_coefficients(point), template.option, template.tensor, template.index_set)
        for point in points
    ]
    reports = [stability_bound(problem, high_grid) for problem in problems]
    unstable = [position for position, report in enumerate(reports) if not report.stable]
    if unstable:
        needed = max(reports[position].admissible_n_tau for position in unstable)
        raise UnstableSchemeError(
            f"High-fidelity grid n_tau={high_grid.n_tau} unstable at {len(unstable)} selected "
            f"points (first {points[unstable[0]].tolist()}); choose n_tau >= {needed}",
            needed,
        )

    tracker = ProgressTracker(len(problems), progress, stage="high fidelity")
    high_snapshots = np.array(
        map_ordered(
            lambda problem: solve(problem, high_grid).flatten(),
            problems,
            workers=workers,
            on_result=lambda position, result: tracker.advance(),
        )
    )
    low_snapshots = np.array(low_snapshots, dtype=float)
    gram, gram_cholesky, jitter = gram_factor(low_snapshots)

    manifest = {
        "format_version": FORMAT_VERSION,
        **problem_manifest(template, low_grid, high_grid),
        "A": int(points.shape[0]),
        "points": points.tolist(),
        "gram_jitter": jitter,
        **(extra_manifest or {}),
    }
    logger.info(f"[offline_highfid] {points.shape[0]} high-fidelity snapshots computed")
    return BifidStore(
        manifest=manifest,
        points=points,
        low_snapshots=low_snapshots,
        high_snapshots=high_snapshots,
        gram=gram,
        gram_cholesky=gram_cholesky,
        rejected=list((extra_manifest or {}).get("rejected", [])),
    )


def run_offline(
    sample_grid: SampleGrid,
    template: ProblemTemplate,
    low_grid: GridSpec,
    high_grid: GridSpec,
    budget: int,
    tolerance: float = 0.0,
    workers: int = 1,
    progress: ProgressCallback | None = None,
    memmap_dir=None,
) -> BifidStore:
    """Low-fidelity sweep, greedy selection, then high-fidelity snapshots."""
    sweep = offline_sweep(
        sample_grid.points, template, low_grid, workers=workers, progress=progress, memmap_dir=memmap_dir
    )
    try:
        selection = select_points(sweep.snapshots, min(int(budget), sweep.count), tolerance)
        chosen = list(selection.indices)
        chosen_points = sweep.points[chosen]
        chosen_snapshots = np.array(sweep.snapshots[chosen], dtype=float)
    finally:
        sweep.release()
    extra = {
        "sample_points": int(len(sample_grid)),
        "accepted_points": sweep.count,
        "selection": {
            "requested": selection.requested,
            "selected": selection.rank,
            "stopped_by": selection.stopped_by,
            "distances": list(selection.distances),
            "sample_indices": [int(sweep.indices[position]) for position in chosen],
        },
        "rejected": [point.to_record() for point in sweep.rejected],
    }
    return offline_highfid(
        chosen_points,
        chosen_snapshots,
        template,
        low_grid,
        high_grid,
        workers=workers,
        progress=progress,
        extra_manifest=extra,
    )
