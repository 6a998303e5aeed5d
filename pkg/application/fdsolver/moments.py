from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
import pandas as pd
from scipy.interpolate import RegularGridInterpolator

from constants import DAYS_PER_YEAR, SurfaceColumns
from application.fdsolver.scheme import SolutionField
from domain.pricing.black_scholes import bs_closed_form
from infrastructure.storage.tables import build_frame
from utils.exceptions import NumericalCorruptionError

logger = logging.getLogger(__name__)

NEGATIVE_VARIANCE_TOLERANCE = 1e-12
REFERENCE_COLUMN = "reference"


@dataclass(frozen=True)
class MomentSurfaces:
    """Mean and variance on S = strike * zeta / (1 - zeta), zeta = 1 omitted.

    Rows follow the stored time levels in tau order, so t_days decreases
    from the maturity down to 0.
    """

    S: np.ndarray
    t_days: np.ndarray
    mean: np.ndarray
    variance: np.ndarray
    asymptote_slope: np.ndarray
    strike: float
    rate: float

    @property
    def tau_years(self) -> np.ndarray:
        return (self.t_days[0] - self.t_days) / DAYS_PER_YEAR

    def payoff(self) -> np.ndarray:
        return np.maximum(self.S - self.strike, 0.0)

    def reference(self, sigma: float) -> np.ndarray:
        """Closed-form prices at constant volatility on the same nodes."""
        tau = self.tau_years[:, None]
        return np.asarray(bs_closed_form(self.S[None, :], tau, self.strike, self.rate, sigma))


def moments(field: SolutionField) -> MomentSurfaces:
    zeta = field.zeta[:-1]
    strike = field.problem.strike
    S = strike * zeta / (1.0 - zeta)
    scale = S + strike
    coeffs = field.coeffs[:, :-1, :]

    mean = scale[None, :] * coeffs[:, :, 0]
    variance = scale[None, :] ** 2 * np.sum(coeffs[:, :, 1:] ** 2, axis=2)
    lowest = float(np.min(variance)) if variance.size else 0.0
    if lowest < -NEGATIVE_VARIANCE_TOLERANCE:
        raise NumericalCorruptionError(f"Negative variance {lowest:.3e} in moment surfaces")
    variance = np.maximum(variance, 0.0)

    t_days = field.problem.option.maturity_days - field.tau * DAYS_PER_YEAR
    return MomentSurfaces(
        S=S,
        t_days=t_days,
        mean=mean,
        variance=variance,
        asymptote_slope=field.coeffs[:, -1, 0].copy(),
        strike=strike,
        rate=field.problem.rate,
    )


def evaluate_at(field: SolutionField, S, t_days) -> tuple[np.ndarray, np.ndarray]:
    """Mean and variance at arbitrary (S, t) by interpolation in (tau, zeta)."""
    S, t_days = np.broadcast_arrays(np.asarray(S, dtype=float), np.asarray(t_days, dtype=float))
    strike = field.problem.strike
    zeta = S / (S + strike)
    tau = (field.problem.option.maturity_days - t_days) / DAYS_PER_YEAR
    tau = np.clip(tau, field.tau[0], field.tau[-1])

    interpolator = RegularGridInterpolator((field.tau, field.zeta), field.coeffs)
    values = interpolator(np.column_stack([tau.reshape(-1), zeta.reshape(-1)]))
    scale = (S + strike).reshape(-1)
    mean = scale * values[:, 0]
    variance = scale**2 * np.sum(values[:, 1:] ** 2, axis=1)
    return mean.reshape(S.shape), variance.reshape(S.shape)


@dataclass(frozen=True)
class SmoothingArea:
    t_days: np.ndarray
    S_low: np.ndarray
    S_high: np.ndarray
    threshold: float

    def to_record(self) -> dict:
        return {
            "threshold": self.threshold,
            "t_days": self.t_days.tolist(),
            "S_low": [None if np.isnan(value) else float(value) for value in self.S_low],
            "S_high": [None if np.isnan(value) else float(value) for value in self.S_high],
        }


def smoothing_area(surfaces: MomentSurfaces, threshold: float | None = None) -> SmoothingArea:
    """Borders of the region where the mean departs from the payoff.

    Heuristic: nodes with |mean - payoff| above the threshold, by default
    1e-6 times the strike.
    """
    threshold = 1e-6 * surfaces.strike if threshold is None else float(threshold)
    deviation = np.abs(surfaces.mean - surfaces.payoff()[None, :]) > threshold
    S_low = np.full(surfaces.t_days.size, np.nan)
    S_high = np.full(surfaces.t_days.size, np.nan)
    for level, row in enumerate(deviation):
        nodes = np.flatnonzero(row)
        if nodes.size:
            S_low[level] = surfaces.S[nodes[0]]
            S_high[level] = surfaces.S[nodes[-1]]
    return SmoothingArea(t_days=surfaces.t_days, S_low=S_low, S_high=S_high, threshold=threshold)


def surface_frame(surfaces: MomentSurfaces, reference_sigma: float | None = None) -> pd.DataFrame:
    """Long table t_days, S, mean, variance with an optional reference column."""
    levels, nodes = surfaces.mean.shape
    frame = build_frame(
        SurfaceColumns,
        {
            SurfaceColumns.T_DAYS.name: np.repeat(surfaces.t_days, nodes),
            SurfaceColumns.S.name: np.tile(surfaces.S, levels),
            SurfaceColumns.MEAN.name: surfaces.mean.reshape(-1),
            SurfaceColumns.VARIANCE.name: surfaces.variance.reshape(-1),
        },
    )
    if reference_sigma is not None:
        frame[REFERENCE_COLUMN] = surfaces.reference(reference_sigma).reshape(-1)
    return frame
