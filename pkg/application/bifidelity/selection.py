from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from application.fdsolver.planning import BYTES_PER_VALUE, plan_memory
from utils.exceptions import ConfigurationError

logger = logging.getLogger(__name__)

RANK_TOLERANCE = 1e-12
BLOCK_BYTES = 256 * 1024**2


@dataclass(frozen=True)
class Selection:
    indices: tuple[int, ...]
    distances: tuple[float, ...]
    requested: int
    stopped_by: str

    @property
    def rank(self) -> int:
        return len(self.indices)


def column_blocks(rows: int, columns: int, block_bytes: int = BLOCK_BYTES):
    """Column slices whose rows together take about ``block_bytes``."""
    width = max(1, int(block_bytes) // max(1, int(rows) * BYTES_PER_VALUE))
    for start in range(0, int(columns), width):
        yield slice(start, min(start + width, int(columns)))


def blocked_gram(snapshots: np.ndarray, block_bytes: int = BLOCK_BYTES) -> np.ndarray:
    """Gram matrix of the rows from one pass over column blocks.

    Each block is read once, so a memory-mapped array is streamed a single
    time in file order.
    """
    count, columns = snapshots.shape
    gram = np.zeros((count, count))
    for block in column_blocks(count, columns, block_bytes):
        part = np.asarray(snapshots[:, block], dtype=float)
        gram += part @ part.T
    return 0.5 * (gram + gram.T)


class _GramColumns:
    """Gram columns taken from a precomputed Gram matrix."""

    def __init__(self, gram: np.ndarray):
        self.gram = gram

    def diagonal(self) -> np.ndarray:
        return np.diag(self.gram).copy()

    def column(self, pivot: int) -> np.ndarray:
        return self.gram[:, pivot]


class _StreamedColumns:
    """Gram columns formed on demand, one blocked pass per pivot."""

    def __init__(self, snapshots: np.ndarray, block_bytes: int):
        self.snapshots = snapshots
        self.block_bytes = block_bytes

    def diagonal(self) -> np.ndarray:
        count, columns = self.snapshots.shape
        norms = np.zeros(count)
        for block in column_blocks(count, columns, self.block_bytes):
            part = np.asarray(self.snapshots[:, block], dtype=float)
            norms += np.einsum("ij,ij->i", part, part)
        return norms

    def column(self, pivot: int) -> np.ndarray:
        count, columns = self.snapshots.shape
        values = np.zeros(count)
        for block in column_blocks(count, columns, self.block_bytes):
            part = np.asarray(self.snapshots[:, block], dtype=float)
            values += part @ part[pivot]
        return values


def select_points(
    snapshots: np.ndarray,
    budget: int,
    tolerance: float = 0.0,
    block_bytes: int = BLOCK_BYTES,
) -> Selection:
    """Greedy selection of the rows spanning the largest subspace.

    Pivoted Cholesky on the Gram matrix of the rows. The first pivot is the
    row of largest norm; each following one has the largest distance to the
    span of the rows already chosen. Ties go to the lowest row.

    The Gram matrix is formed in one blocked pass when it fits in memory.
    Otherwise each pivot's Gram column is formed by its own blocked pass.
    """
    snapshots = np.asarray(snapshots)
    count = snapshots.shape[0]
    if int(budget) < 1:
        raise ConfigurationError(f"Budget must be at least 1, got {budget}")
    if int(budget) > count:
        raise ConfigurationError(f"Budget {budget} exceeds the {count} available snapshots")
    budget = int(budget)

    if plan_memory(count * count * BYTES_PER_VALUE, "selection Gram matrix").fits:
        source = _GramColumns(blocked_gram(snapshots, block_bytes))
    else:
        logger.warning(f"[select_points] Gram matrix of {count} rows does not fit, streaming its columns")
        source = _StreamedColumns(snapshots, block_bytes)

    residual = source.diagonal()
    first_residual = float(np.max(residual))
    factor = np.zeros((count, budget))
    indices: list[int] = []
    distances: list[float] = []
    stopped_by = "budget"

    for step in range(budget):
        pivot = int(np.argmax(residual))
        pivot_residual = float(residual[pivot])
        if first_residual <= 0.0 or pivot_residual <= RANK_TOLERANCE * first_residual:
            stopped_by = "rank"
            break
        distance = float(np.sqrt(pivot_residual))
        if step > 0 and distance < tolerance * np.sqrt(first_residual):
            stopped_by = "tolerance"
            break

        column = (source.column(pivot) - factor[:, :step] @ factor[pivot, :step]) / distance
        factor[:, step] = column
        residual = np.maximum(residual - column**2, 0.0)
        residual[indices + [pivot]] = 0.0

        indices.append(pivot)
        distances.append(distance)

    if len(indices) < budget:
        logger.warning(
            f"[select_points] selected {len(indices)} of {budget} points, stopped by {stopped_by}"
        )
    else:
        logger.info(f"[select_points] selected {budget} points")
    return Selection(
        indices=tuple(indices),
        distances=tuple(distances),
        requested=budget,
        stopped_by=stopped_by,
    )
