from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np
from scipy.optimize import minimize, minimize_scalar

from domain.gpc.orthopoly import DistributionFamily, FamilyKind, parse_families
from domain.volatility.model import VolatilityModel, model_density
from utils.exceptions import ConfigurationError, DegenerateModelError

logger = logging.getLogger(__name__)

ANGLE_GRID_POINTS = 64
ANGLE_TOLERANCE = 1e-7
DEFAULT_FAMILIES = "normal,uniform:0.5"


class FitMode(Enum):
    MEAN_VARIANCE = "mean_variance"
    MEAN_ONLY = "mean_only"


@dataclass(frozen=True)
class FitResult:
    model: VolatilityModel
    mode: FitMode
    log_likelihood: float
    sample_count: int
    sample_mean: float
    sample_variance: float
    angle: float | None = None

    def to_record(self) -> dict:
        return {
            "mode": self.mode.value,
            "model": self.model.to_record(),
            "log_likelihood": self.log_likelihood,
            "sample_count": self.sample_count,
            "sample_mean": self.sample_mean,
            "sample_variance": self.sample_variance,
            "angle": self.angle,
        }


def log_likelihood(model: VolatilityModel, samples: np.ndarray) -> float:
    with np.errstate(divide="ignore"):
        return float(np.sum(np.log(model_density(model, samples))))


def _linear_positions(families: tuple[DistributionFamily, ...]) -> tuple[int, int]:
    kinds = [family.kind for family in families]
    if len(families) != 2 or sorted(kind.value for kind in kinds) != ["normal", "uniform"]:
        raise ConfigurationError(
            "Fitting supports exactly one normal and one uniform variable, got "
            + ",".join(family.label for family in families)
        )
    normal_position = 1 + kinds.index(FamilyKind.STANDARD_NORMAL)
    return normal_position, 3 - normal_position


class _LikelihoodFit:
    def __init__(self, samples: np.ndarray, families: tuple[DistributionFamily, ...]):
        self.samples = samples
        self.families = families
        self.normal_position, self.uniform_position = _linear_positions(families)

    def model(self, center: float, normal_coefficient: float, uniform_coefficient: float) -> VolatilityModel:
        coefficients = np.zeros(3)
        coefficients[0] = center
        coefficients[self.normal_position] = normal_coefficient
        coefficients[self.uniform_position] = uniform_coefficient
        return VolatilityModel.build(self.families, 1, coefficients)

    def log_likelihood(self, center: float, normal_coefficient: float, uniform_coefficient: float) -> float:
        if normal_coefficient == 0.0 and uniform_coefficient == 0.0:
            return -np.inf
        return log_likelihood(self.model(center, normal_coefficient, uniform_coefficient), self.samples)


def _fit_angle(fit: _LikelihoodFit, center: float, spread: float) -> tuple[float, float]:
    def objective(angle: float) -> float:
        value = fit.log_likelihood(center, spread * np.cos(angle), spread * np.sin(angle))
        return -value if np.isfinite(value) else np.inf

    angles = np.linspace(0.0, np.pi / 2, ANGLE_GRID_POINTS + 1)
    values = np.array([objective(angle) for angle in angles])
    if not np.any(np.isfinite(values)):
        raise DegenerateModelError("Log-likelihood is not finite for any variance split")
    best = int(np.argmin(values))
    low = angles[max(best - 1, 0)]
    high = angles[min(best + 1, angles.size - 1)]
    refined = minimize_scalar(
        objective, bounds=(low, high), method="bounded", options={"xatol": ANGLE_TOLERANCE}
    )
    if refined.success and np.isfinite(refined.fun) and refined.fun <= values[best]:
        return float(refined.x), float(-refined.fun)
    return float(angles[best]), float(-values[best])


def fit_constrained_mle(
    samples: Sequence[float],
    families: Sequence[DistributionFamily] | str = DEFAULT_FAMILIES,
    mode: FitMode | str = FitMode.MEAN_VARIANCE,
) -> FitResult:
    """Fit sigma_00 + sigma_n Theta + sigma_u p_1(Delta) to volatility observations.

    The mean always matches the sample mean. In mean_variance mode the
    variance matches the sample variance too and only the split angle
    between the two stochastic coefficients is searched.
    """
    samples = np.asarray(samples, dtype=float).reshape(-1)
    if isinstance(families, str):
        families = parse_families(families)
    families = tuple(families)
    mode = FitMode(mode)
    if samples.size < 3:
        raise DegenerateModelError(f"At least 3 observations are needed, got {samples.size}")
    if not np.all(np.isfinite(samples)):
        raise DegenerateModelError("Observations contain non-finite values")

    center = float(np.mean(samples))
    variance = float(np.var(samples, ddof=1))
    if not variance > 0:
        raise DegenerateModelError("Observations have zero variance")
    spread = float(np.sqrt(variance))
    fit = _LikelihoodFit(samples, families)

    angle = None
    if mode is FitMode.MEAN_VARIANCE:
        angle, best_value = _fit_angle(fit, center, spread)
        normal_coefficient = spread * np.cos(angle)
        uniform_coefficient = spread * np.sin(angle)
    else:
        def objective(parameters: np.ndarray) -> float:
            value = fit.log_likelihood(center, abs(parameters[0]), abs(parameters[1]))
            return -value if np.isfinite(value) else 1e300

        start_angle, _ = _fit_angle(fit, center, spread)
        start = spread * np.array([np.cos(start_angle), np.sin(start_angle)])
        result = minimize(
            objective,
            start,
            method="Nelder-Mead",
            options={"xatol": 1e-10, "fatol": 1e-10, "maxiter": 4000},
        )
        normal_coefficient, uniform_coefficient = np.abs(result.x)
        best_value = -float(result.fun)

    if not np.isfinite(best_value):
        raise DegenerateModelError("Fitted log-likelihood is not finite")
    model = fit.model(center, float(normal_coefficient), float(uniform_coefficient)).canonical()
    logger.info(
        f"[fit_constrained_mle] {mode.value}: coefficients {model.coefficients.tolist()}, "
        f"log-likelihood {best_value:.6f} over {samples.size} observations"
    )
    return FitResult(
        model=model,
        mode=mode,
        log_likelihood=float(best_value),
        sample_count=int(samples.size),
        sample_mean=center,
        sample_variance=variance,
        angle=angle,
    )
