from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.stats import norm

from domain.gpc.multiindex import IndexSet, MultiIndex, build_index_set
from domain.gpc.orthopoly import (
    DistributionFamily,
    FamilyKind,
    PolynomialBasis,
    parse_families,
)
from utils.exceptions import ConfigurationError, DegenerateModelError


@dataclass(frozen=True)
class VolatilityModel:
    """Truncated expansion Sigma = sum_a sigma_a p_a(Theta) in an orthonormal basis.

    Coefficients follow the graded order of the degree-K index set, so for
    two variables and K=1 they read (sigma_00, sigma_10, sigma_01).
    """

    families: tuple[DistributionFamily, ...]
    vol_index_set: IndexSet
    coefficients: np.ndarray

    def __post_init__(self):
        coefficients = np.asarray(self.coefficients, dtype=float).reshape(-1)
        if coefficients.size != self.vol_index_set.size:
            raise ConfigurationError(
                f"{coefficients.size} coefficients given, the degree-{self.vol_index_set.max_degree} "
                f"index set in {self.vol_index_set.dimensions} variables has {self.vol_index_set.size}"
            )
        if len(self.families) != self.vol_index_set.dimensions:
            raise ConfigurationError(
                f"{len(self.families)} families for {self.vol_index_set.dimensions} variables"
            )
        if not np.all(np.isfinite(coefficients)):
            raise ConfigurationError(f"Non-finite volatility coefficients {coefficients}")
        coefficients.setflags(write=False)
        object.__setattr__(self, "coefficients", coefficients)

    @classmethod
    def build(
        cls,
        families: Sequence[DistributionFamily] | str,
        vol_degree: int,
        coefficients: Sequence[float],
    ) -> "VolatilityModel":
        if isinstance(families, str):
            families = parse_families(families)
        families = tuple(families)
        return cls(families, build_index_set(len(families), vol_degree), np.asarray(coefficients))

    @classmethod
    def deterministic(
        cls,
        sigma: float,
        families: Sequence[DistributionFamily] | str = "normal,uniform:0.5",
        vol_degree: int = 1,
    ) -> "VolatilityModel":
        if isinstance(families, str):
            families = parse_families(families)
        index_set = build_index_set(len(families), vol_degree)
        coefficients = np.zeros(index_set.size)
        coefficients[0] = sigma
        return cls(tuple(families), index_set, coefficients)

    @classmethod
    def from_raw(
        cls,
        families: Sequence[DistributionFamily] | str,
        raw_coefficients: Sequence[float],
    ) -> "VolatilityModel":
        """Model from coefficients on the variables themselves (K <= 1)."""
        if isinstance(families, str):
            families = parse_families(families)
        families = tuple(families)
        raw = np.asarray(raw_coefficients, dtype=float)
        degree = 0 if raw.size == 1 else 1
        index_set = build_index_set(len(families), degree)
        if raw.size != index_set.size:
            raise ConfigurationError(
                f"Raw coefficients need {index_set.size} values, got {raw.size}"
            )
        scales = np.ones(index_set.size)
        scales[1:] = [1.0 / family.linear_scale for family in families][: index_set.size - 1]
        return cls(families, index_set, raw * scales)

    @property
    def dimensions(self) -> int:
        return self.vol_index_set.dimensions

    @property
    def vol_degree(self) -> int:
        return self.vol_index_set.max_degree

    @property
    def mean(self) -> float:
        return float(self.coefficients[0])

    @property
    def variance(self) -> float:
        return float(np.sum(self.coefficients[1:] ** 2))

    @property
    def second_moment(self) -> float:
        return float(np.sum(self.coefficients**2))

    @property
    def is_deterministic(self) -> bool:
        return bool(np.all(self.coefficients[1:] == 0.0))

    def coefficient(self, alpha: MultiIndex | Sequence[int]) -> float:
        return float(self.coefficients[self.vol_index_set.position_of(alpha)])

    def raw_coefficients(self) -> np.ndarray:
        """Coefficients on the variables themselves, defined for K <= 1."""
        if self.vol_degree > 1:
            raise ConfigurationError("Raw coefficients are defined for K <= 1 only")
        raw = self.coefficients.copy()
        for position in range(1, self.vol_index_set.size):
            raw[position] *= self.families[position - 1].linear_scale
        return raw

    def basis(self) -> PolynomialBasis:
        return PolynomialBasis(self.families, self.vol_index_set)

    def evaluate(self, points: np.ndarray) -> np.ndarray:
        return self.coefficients @ self.basis().evaluate(points)

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        points = np.column_stack([family.sample(rng, size) for family in self.families])
        return self.evaluate(points)

    def flip_signs(self, variables: Sequence[int]) -> "VolatilityModel":
        """Same model after Theta_i -> -Theta_i for the given variables."""
        parity = self.vol_index_set.as_array()[:, list(variables)].sum(axis=1) % 2
        return VolatilityModel(
            self.families,
            self.vol_index_set,
            np.where(parity == 1, -self.coefficients, self.coefficients),
        )

    def canonical(self) -> "VolatilityModel":
        """Representative with nonnegative degree-one coefficients."""
        if self.vol_degree < 1:
            return self
        to_flip = [i for i in range(self.dimensions) if self.coefficients[1 + i] < 0]
        return self.flip_signs(to_flip) if to_flip else self

    @property
    def families_label(self) -> str:
        return ",".join(family.label for family in self.families)

    def to_record(self) -> dict:
        record = {
            "L": self.dimensions,
            "K": self.vol_degree,
            "families": self.families_label,
            "indices": [str(index) for index in self.vol_index_set],
            "coefficients": self.coefficients.tolist(),
            "mean": self.mean,
            "variance": self.variance,
        }
        if self.vol_degree <= 1:
            record["raw_coefficients"] = self.raw_coefficients().tolist()
        return record


def _split_linear_parts(model: VolatilityModel) -> tuple[float, float, float]:
    if model.dimensions != 2 or model.vol_degree != 1:
        raise ConfigurationError(
            f"Closed-form density needs L=2 and K=1, got L={model.dimensions} K={model.vol_degree}"
        )
    kinds = {family.kind for family in model.families}
    if kinds != {FamilyKind.STANDARD_NORMAL, FamilyKind.UNIFORM_SYMMETRIC}:
        raise ConfigurationError(
            f"Closed-form density needs one normal and one uniform variable, got {model.families_label}"
        )
    normal_position = 1 + [family.kind for family in model.families].index(FamilyKind.STANDARD_NORMAL)
    uniform_position = 3 - normal_position
    return (
        float(model.coefficients[0]),
        abs(float(model.coefficients[normal_position])),
        abs(float(model.coefficients[uniform_position])),
    )


def model_density(model: VolatilityModel, x) -> np.ndarray | float:
    """Density of sigma_00 + sigma_n Theta + sigma_u p_1(Delta) at x.

    The uniform part spreads over a width w = sqrt(12)|sigma_u| for every
    half width of Delta.
    """
    center, normal_scale, uniform_coefficient = _split_linear_parts(model)
    if normal_scale == 0.0 and uniform_coefficient == 0.0:
        raise DegenerateModelError("Both stochastic coefficients are zero, density is a point mass")
    x = np.asarray(x, dtype=float)
    width = np.sqrt(12.0) * uniform_coefficient

    if uniform_coefficient == 0.0:
        density = norm.pdf(x, loc=center, scale=normal_scale)
    elif normal_scale == 0.0:
        density = np.where(np.abs(x - center) <= width / 2, 1.0 / width, 0.0)
    else:
        upper = (x - center + width / 2) / normal_scale
        lower = (x - center - width / 2) / normal_scale
        # tail-safe difference of normal cdfs
        density = np.where(
            lower > 0,
            norm.sf(lower) - norm.sf(upper),
            norm.cdf(upper) - norm.cdf(lower),
        ) / width
    return float(density) if density.ndim == 0 else density
