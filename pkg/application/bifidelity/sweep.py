from __future__ import annotations

import logging
import shutil
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from application.bifidelity.events import ProgressCallback, ProgressTracker
from application.fdsolver.grid import GridSpec
from application.fdsolver.planning import estimate_sweep_bytes, plan_memory, snapshot_size
from application.fdsolver.scheme import solve
from application.fdsolver.stability import stability_bound
from application.sgsystem.problem import ProblemTemplate, build_problem
from infrastructure.parallel import map_ordered
from utils.exceptions import NonParabolicError, NumericalRejectionError

logger = logging.getLogger(__name__)

REASON_NON_PARABOLIC = "non-parabolic"
REASON_UNSTABLE = "unstable"


@dataclass(frozen=True)
class RejectedPoint:
    index: int
    coefficients: tuple[float, ...]
    reason: str
    detail: str

    def to_record(self) -> dict:
        return {
            "index": self.index,
            "coefficients": list(self.coefficients),
            "reason": self.reason,
            "detail": self.detail,
        }


@dataclass
class SweepResult:
    """Low-fidelity snapshots, one flattened field per accepted point."""

    points: np.ndarray
    indices: np.ndarray
    snapshots: np.ndarray
    rejected: list[RejectedPoint] = field(default_factory=list)
    backing_file: Path | None = None
    scratch_dir: Path | None = None

    @property
    def count(self) -> int:
        return int(self.indices.size)

    def release(self) -> None:
        """Drop the memory-mapped snapshots and delete their backing file."""
        if self.backing_file is None:
            return
        self.snapshots = np.empty((0, self.snapshots.shape[1]))
        _remove_scratch(self.backing_file, self.scratch_dir)
        self.backing_file = None
        self.scratch_dir = None


def _solve_point(template: ProblemTemplate, grid: GridSpec, index: int, coefficients: np.ndarray):
    model = template.model_from_coefficients(coefficients)
    try:
        problem = build_problem(model, template.option, template.tensor, template.index_set)
    except NonParabolicError as e:
        return RejectedPoint(index, tuple(coefficients.tolist()), REASON_NON_PARABOLIC, str(e))
    report = stability_bound(problem, grid)
    if not report.stable:
        return RejectedPoint(
            index,
            tuple(coefficients.tolist()),
            REASON_UNSTABLE,
            f"cfl {report.cfl:.4f}, admissible n_tau {report.admissible_n_tau}",
        )
    return solve(problem, grid).flatten()


def _remove_scratch(path: Path, scratch_dir: Path | None) -> None:
    path.unlink(missing_ok=True)
    if scratch_dir is not None:
        shutil.rmtree(scratch_dir, ignore_errors=True)
    logger.debug(f"[offline_sweep] removed {path}")


def _allocate(
    rows: int, columns: int, memmap_dir: str | Path | None
) -> tuple[np.ndarray, Path | None, Path | None]:
    """Snapshot array in memory, or backed by a scratch file when it does not fit.

    Returns the array, the backing file and the directory created for it.
    """
    plan = plan_memory(rows * columns * np.dtype(float).itemsize, "offline sweep")
    if plan.fits:
        return np.empty((rows, columns)), None, None
    if memmap_dir:
        directory = Path(memmap_dir)
        scratch_dir = None if directory.exists() else directory
        directory.mkdir(parents=True, exist_ok=True)
    else:
        directory = scratch_dir = Path(tempfile.mkdtemp(prefix="sweep_"))
    path = directory / "low_snapshots.dat"
    logger.warning(f"[offline_sweep] snapshots backed by {path}")
    return np.memmap(path, dtype=float, mode="w+", shape=(rows, columns)), path, scratch_dir


def offline_sweep(
    points: np.ndarray,
    template: ProblemTemplate,
    low_grid: GridSpec,
    workers: int = 1,
    progress: ProgressCallback | None = None,
    memmap_dir: str | Path | None = None,
) -> SweepResult:
    """Low-fidelity solve at every admissible coefficient triple."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    if points.shape[0] == 0:
        raise NumericalRejectionError("Sample grid is empty")
    columns = snapshot_size(low_grid, template.index_set.size)
    logger.info(
        f"[offline_sweep] {points.shape[0]} sample points, "
        f"{estimate_sweep_bytes(points.shape[0], low_grid, template.index_set.size) / 1024**2:.1f} MB of snapshots at most"
    )
    snapshots, backing_file, scratch_dir = _allocate(points.shape[0], columns, memmap_dir)
    accepted: list[int] = []
    rejected: list[RejectedPoint] = []
    tracker = ProgressTracker(points.shape[0], progress, stage="offline sweep")

    def collect(position: int, result) -> None:
        if isinstance(result, RejectedPoint):
            rejected.append(result)
            logger.debug(f"[offline_sweep] point {position} rejected: {result.reason} ({result.detail})")
        else:
            snapshots[len(accepted)] = result
            accepted.append(position)
        tracker.advance()

    try:
        map_ordered(
            lambda position: _solve_point(template, low_grid, position, points[position]),
            range(points.shape[0]),
            workers=workers,
            on_result=collect,
        )
    except BaseException:
        if backing_file is not None:
            _remove_scratch(backing_file, scratch_dir)
        raise

    if not accepted:
        if backing_file is not None:
            _remove_scratch(backing_file, scratch_dir)
        raise NumericalRejectionError(
            f"All {points.shape[0]} sample points were rejected "
            f"({sum(r.reason == REASON_NON_PARABOLIC for r in rejected)} non-parabolic, "
            f"{sum(r.reason == REASON_UNSTABLE for r in rejected)} unstable)"
        )
    indices = np.array(accepted, dtype=int)
    logger.info(
        f"[offline_sweep] {indices.size} snapshots, {len(rejected)} points rejected"
    )
    return SweepResult(
        points=points[indices],
        indices=indices,
        snapshots=snapshots[: indices.size],
        rejected=rejected,
        backing_file=backing_file,
        scratch_dir=scratch_dir,
    )
