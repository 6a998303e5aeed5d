from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from utils.exceptions import ConfigurationError


@dataclass(frozen=True)
class GridSpec:
    """Equidistant grid with m_zeta intervals on [0, 1] and n_tau time steps."""

    m_zeta: int
    n_tau: int
    time_thinning: int = 1

    def __post_init__(self):
        if int(self.m_zeta) < 2:
            raise ConfigurationError(f"m_zeta must be at least 2, got {self.m_zeta}")
        if int(self.n_tau) < 1:
            raise ConfigurationError(f"n_tau must be at least 1, got {self.n_tau}")
        if int(self.time_thinning) < 1:
            raise ConfigurationError(f"time_thinning must be at least 1, got {self.time_thinning}")
        object.__setattr__(self, "m_zeta", int(self.m_zeta))
        object.__setattr__(self, "n_tau", int(self.n_tau))
        object.__setattr__(self, "time_thinning", int(self.time_thinning))

    @property
    def d_zeta(self) -> float:
        return 1.0 / self.m_zeta

    def d_tau(self, maturity_years: float) -> float:
        return float(maturity_years) / self.n_tau

    def zeta(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.m_zeta + 1)

    def stored_steps(self) -> np.ndarray:
        """Time steps kept in the solution, always including the first and last."""
        steps = np.arange(0, self.n_tau + 1, self.time_thinning)
        if steps[-1] != self.n_tau:
            steps = np.append(steps, self.n_tau)
        return steps

    def with_n_tau(self, n_tau: int) -> "GridSpec":
        return GridSpec(self.m_zeta, n_tau, self.time_thinning)

    def to_record(self) -> dict:
        return {
            "m_zeta": self.m_zeta,
            "n_tau": self.n_tau,
            "time_thinning": self.time_thinning,
        }
