"""Orthonormal polynomial families, Gauss rules and tensor-product bases."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from functools import lru_cache

import numpy as np
from scipy.linalg import eigh_tridiagonal
from scipy.stats import norm, uniform

from domain.gpc.multiindex import IndexSet
from utils.exceptions import ConfigurationError


class FamilyKind(Enum):
    STANDARD_NORMAL = "normal"
    UNIFORM_SYMMETRIC = "uniform"


@dataclass(frozen=True)
class DistributionFamily:
    kind: FamilyKind
    half_width: float = 0.5

    def __post_init__(self):
        if self.kind is FamilyKind.UNIFORM_SYMMETRIC and not self.half_width > 0:
            raise ConfigurationError(f"Uniform half width must be positive, got {self.half_width}")

    @classmethod
    def standard_normal(cls) -> "DistributionFamily":
        return cls(FamilyKind.STANDARD_NORMAL, 0.0)

    @classmethod
    def uniform_symmetric(cls, half_width: float = 0.5) -> "DistributionFamily":
        return cls(FamilyKind.UNIFORM_SYMMETRIC, float(half_width))

    @classmethod
    def from_label(cls, label: str) -> "DistributionFamily":
        name, _, parameter = str(label).strip().lower().partition(":")
        if name in ("normal", "hermite", "gaussian"):
            return cls.standard_normal()
        if name in ("uniform", "legendre"):
            return cls.uniform_symmetric(float(parameter) if parameter else 0.5)
        raise ConfigurationError(f"Unknown distribution family '{label}'")

    @property
    def label(self) -> str:
        if self.kind is FamilyKind.STANDARD_NORMAL:
            return "normal"
        return f"uniform:{self.half_width:g}"

    def recurrence(self, degree: int) -> tuple[np.ndarray, np.ndarray]:
        """Monic recurrence coefficients a_k, b_k for k = 0..degree.

        x p_k = p_{k+1} + a_k p_k + b_k p_{k-1}; b_0 is the total mass 1.
        """
        k = np.arange(degree + 1, dtype=float)
        a = np.zeros(degree + 1)
        if self.kind is FamilyKind.STANDARD_NORMAL:
            b = k.copy()
        else:
            b = self.half_width**2 * k**2 / (4.0 * k**2 - 1.0)
        b[0] = 1.0
        return a, b

    @property
    def linear_scale(self) -> float:
        """Factor c with p_1(x) = c * x for this family."""
        _, b = self.recurrence(1)
        return float(1.0 / np.sqrt(b[1]))

    def pdf(self, x: np.ndarray) -> np.ndarray:
        if self.kind is FamilyKind.STANDARD_NORMAL:
            return norm.pdf(x)
        return uniform.pdf(x, loc=-self.half_width, scale=2 * self.half_width)

    def sample(self, rng: np.random.Generator, size) -> np.ndarray:
        if self.kind is FamilyKind.STANDARD_NORMAL:
            return rng.standard_normal(size)
        return rng.uniform(-self.half_width, self.half_width, size)

    def moment(self, degree: int) -> float:
        if degree % 2:
            return 0.0
        if self.kind is FamilyKind.STANDARD_NORMAL:
            # (d-1)!!
            return float(np.prod(np.arange(degree - 1, 0, -2, dtype=float)))
        return float(self.half_width**degree / (degree + 1))


def eval_all_1d(family: DistributionFamily, max_degree: int, x) -> np.ndarray:
    """Values of p_0..p_max_degree at x, shape (max_degree + 1,) + x.shape."""
    x = np.asarray(x, dtype=float)
    a, b = family.recurrence(max_degree + 1)
    values = np.empty((max_degree + 1,) + x.shape)
    values[0] = 1.0
    if max_degree == 0:
        return values
    values[1] = (x - a[0]) / np.sqrt(b[1])
    for k in range(1, max_degree):
        values[k + 1] = (
            (x - a[k]) * values[k] - np.sqrt(b[k]) * values[k - 1]
        ) / np.sqrt(b[k + 1])
    return values


def eval_1d(family: DistributionFamily, degree: int, x):
    if int(degree) < 0:
        raise ConfigurationError(f"Polynomial degree must be nonnegative, got {degree}")
    values = eval_all_1d(family, int(degree), x)[int(degree)]
    return float(values) if values.ndim == 0 else values


@lru_cache(maxsize=64)
def _gauss_rule(family: DistributionFamily, n_nodes: int) -> tuple[np.ndarray, np.ndarray]:
    a, b = family.recurrence(n_nodes)
    if n_nodes == 1:
        return np.array([a[0]]), np.array([1.0])
    # Golub-Welsch: eigenvalues of the Jacobi matrix are the nodes
    nodes, vectors = eigh_tridiagonal(a[:n_nodes], np.sqrt(b[1:n_nodes]))
    weights = vectors[0, :] ** 2
    weights /= weights.sum()
    nodes = np.where(np.abs(nodes) < 1e-15, 0.0, nodes)
    return nodes, weights


def quadrature_rule(family: DistributionFamily, n_nodes: int) -> tuple[np.ndarray, np.ndarray]:
    if int(n_nodes) < 1:
        raise ConfigurationError(f"Quadrature needs at least one node, got {n_nodes}")
    nodes, weights = _gauss_rule(family, int(n_nodes))
    return nodes.copy(), weights.copy()


@dataclass(frozen=True)
class PolynomialBasis:
    families: tuple[DistributionFamily, ...]
    index_set: IndexSet

    def __post_init__(self):
        if len(self.families) != self.index_set.dimensions:
            raise ConfigurationError(
                f"{len(self.families)} families given for an index set "
                f"of {self.index_set.dimensions} dimensions"
            )

    @property
    def dimensions(self) -> int:
        return self.index_set.dimensions

    @property
    def size(self) -> int:
        return self.index_set.size

    def evaluate(self, points: np.ndarray) -> np.ndarray:
        """Basis values at points of shape (n, L); returns (size, n)."""
        points = np.atleast_2d(np.asarray(points, dtype=float))
        degree = self.index_set.max_degree
        univariate = [
            eval_all_1d(family, degree, points[:, i])
            for i, family in enumerate(self.families)
        ]
        multi = self.index_set.as_array()
        values = np.ones((self.size, points.shape[0]))
        for i in range(self.dimensions):
            values *= univariate[i][multi[:, i]]
        return values

    def tensor_quadrature(self, n_nodes: int) -> tuple[np.ndarray, np.ndarray]:
        rules = [quadrature_rule(family, n_nodes) for family in self.families]
        grids = np.meshgrid(*[nodes for nodes, _ in rules], indexing="ij")
        weight_grids = np.meshgrid(*[weights for _, weights in rules], indexing="ij")
        points = np.stack([grid.ravel() for grid in grids], axis=1)
        weights = np.prod(np.stack([grid.ravel() for grid in weight_grids], axis=1), axis=1)
        return points, weights

    def with_index_set(self, index_set: IndexSet) -> "PolynomialBasis":
        return PolynomialBasis(self.families, index_set)


def parse_families(raw_value) -> tuple[DistributionFamily, ...]:
    if isinstance(raw_value, (list, tuple)):
        items = [str(item) for item in raw_value]
    else:
        items = str(raw_value).replace(" ", "").split(",")
    families = tuple(DistributionFamily.from_label(item) for item in items if item)
    if not families:
        raise ConfigurationError("At least one distribution family is required")
    return families
