from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from domain.gpc.orthopoly import DistributionFamily, parse_families
from utils.exceptions import ConfigurationError

EDGE_TOLERANCE = 1e-12
DEFAULT_FAMILIES = "normal,uniform:0.5"


@dataclass(frozen=True)
class SampleBounds:
    """Admissible region sigma_00 in (0, max], Var(Sigma) <= sigma_00 / 2.

    step applies to raw coefficients, the ones multiplying the variables
    themselves.
    """

    sigma00_max: float = 0.8
    step: float = 0.05
    families: tuple[DistributionFamily, ...] = parse_families(DEFAULT_FAMILIES)

    def __post_init__(self):
        if not self.sigma00_max > 0:
            raise ConfigurationError(f"sigma00_max must be positive, got {self.sigma00_max}")
        if not self.step > 0:
            raise ConfigurationError(f"Sample step must be positive, got {self.step}")
        if len(self.families) != 2:
            raise ConfigurationError("Sample grids are defined for two random variables")

    @property
    def scales(self) -> np.ndarray:
        return np.array([family.linear_scale for family in self.families])


@dataclass(frozen=True)
class SampleGrid:
    points: np.ndarray
    bounds: SampleBounds

    def __len__(self) -> int:
        return self.points.shape[0]

    def __iter__(self):
        return iter(self.points)


def _raw_steps(limit: float, step: float) -> np.ndarray:
    if limit < 0:
        return np.zeros(0)
    count = int(np.floor(limit / step + EDGE_TOLERANCE))
    return np.arange(count + 1) * step


def build_sample_grid(bounds: SampleBounds | None = None) -> SampleGrid:
    """Structured grid in raw coefficients, returned in orthonormal coefficients."""
    bounds = bounds or SampleBounds()
    scales = bounds.scales
    points = []
    for mean in _raw_steps(bounds.sigma00_max, bounds.step)[1:]:
        budget = mean / 2.0
        for raw_first in _raw_steps(scales[0] * np.sqrt(budget), bounds.step):
            first = raw_first / scales[0]
            remaining = max(budget - first**2, 0.0)
            for raw_second in _raw_steps(scales[1] * np.sqrt(remaining), bounds.step):
                points.append((mean, first, raw_second / scales[1]))
    return SampleGrid(np.array(points, dtype=float).reshape(-1, 3), bounds)


def random_sample_points(
    n: int,
    rng: np.random.Generator,
    bounds: SampleBounds | None = None,
) -> SampleGrid:
    """Monte-Carlo cover of the admissible region in orthonormal coefficients."""
    bounds = bounds or SampleBounds()
    points = np.empty((int(n), 3))
    for row in range(int(n)):
        mean = 0.0
        while mean == 0.0:
            mean = bounds.sigma00_max - rng.uniform(0.0, bounds.sigma00_max)
        first = rng.uniform(0.0, np.sqrt(mean / 2.0))
        second = rng.uniform(0.0, np.sqrt(max(mean / 2.0 - first**2, 0.0)))
        points[row] = (mean, first, second)
    return SampleGrid(points, bounds)


def sample_bounds(sigma00_max: float, step: float, families: Sequence[DistributionFamily] | str) -> SampleBounds:
    if isinstance(families, str):
        families = parse_families(families)
    return SampleBounds(float(sigma00_max), float(step), tuple(families))
