from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
import psutil

from application.fdsolver.grid import GridSpec

logger = logging.getLogger(__name__)

MEMORY_FRACTION = 0.5
BYTES_PER_VALUE = np.dtype(float).itemsize


@dataclass(frozen=True)
class MemoryPlan:
    required_bytes: int
    available_bytes: int

    @property
    def fraction(self) -> float:
        if self.available_bytes <= 0:
            return np.inf
        return self.required_bytes / self.available_bytes

    @property
    def fits(self) -> bool:
        return self.fraction <= MEMORY_FRACTION

    def describe(self) -> str:
        return (
            f"{self.required_bytes / 1024**2:.1f} MB needed, "
            f"{self.available_bytes / 1024**2:.1f} MB available"
        )


def snapshot_size(grid: GridSpec, basis_size: int) -> int:
    """Number of stored values of one solution field."""
    return int(grid.stored_steps().size * (grid.m_zeta + 1) * int(basis_size))


def estimate_solution_bytes(grid: GridSpec, basis_size: int) -> int:
    return snapshot_size(grid, basis_size) * BYTES_PER_VALUE


def estimate_sweep_bytes(points: int, grid: GridSpec, basis_size: int) -> int:
    return int(points) * estimate_solution_bytes(grid, basis_size)


def plan_memory(required_bytes: int, label: str = "solve") -> MemoryPlan:
    plan = MemoryPlan(
        required_bytes=int(required_bytes),
        available_bytes=int(psutil.virtual_memory().available),
    )
    if not plan.fits:
        logger.warning(f"[plan_memory] {label}: {plan.describe()}")
    else:
        logger.debug(f"[plan_memory] {label}: {plan.describe()}")
    return plan
