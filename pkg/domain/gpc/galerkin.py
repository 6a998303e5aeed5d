from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from domain.gpc.multiindex import IndexSet, MultiIndex, build_index_set
from domain.gpc.orthopoly import DistributionFamily, PolynomialBasis
from utils.exceptions import ConfigurationError

logger = logging.getLogger(__name__)

ROUND_OFF = 1e-13


@dataclass(frozen=True)
class GalerkinTensor:
    """M[a, b, g, d] = <p_a p_b p_g p_d> for |a|,|b| <= K and |g|,|d| <= N.

    The first two axes run over the volatility index set, the last two over
    the solution index set, both in graded order.
    """

    families: tuple[DistributionFamily, ...]
    vol_index_set: IndexSet
    index_set: IndexSet
    values: np.ndarray
    quadrature_nodes: int

    @property
    def dimensions(self) -> int:
        return self.index_set.dimensions

    @property
    def vol_degree(self) -> int:
        return self.vol_index_set.max_degree

    @property
    def solution_degree(self) -> int:
        return self.index_set.max_degree

    @property
    def key(self) -> tuple[int, int, int, tuple[str, ...]]:
        return (
            self.dimensions,
            self.vol_degree,
            self.solution_degree,
            tuple(family.label for family in self.families),
        )

    def entry(self, alpha, beta, gamma, delta) -> float:
        return float(
            self.values[
                self.vol_index_set.position_of(alpha),
                self.vol_index_set.position_of(beta),
                self.index_set.position_of(gamma),
                self.index_set.position_of(delta),
            ]
        )

    def __getitem__(self, item: tuple[MultiIndex, MultiIndex, MultiIndex, MultiIndex]) -> float:
        return self.entry(*item)


def default_quadrature_nodes(vol_degree: int, solution_degree: int) -> int:
    return int(vol_degree) + int(solution_degree) + 1


def galerkin_tensor(
    basis: PolynomialBasis,
    K: int,
    N: int,
    quadrature_nodes: int = 0,
) -> GalerkinTensor:
    if int(K) < 0 or int(N) < 0:
        raise ConfigurationError(f"Degrees must be nonnegative, got K={K}, N={N}")
    K, N = int(K), int(N)
    minimum_nodes = default_quadrature_nodes(K, N)
    n_nodes = int(quadrature_nodes) or minimum_nodes
    if n_nodes < minimum_nodes:
        raise ConfigurationError(
            f"{n_nodes} quadrature nodes cannot integrate degree {2 * (K + N)} exactly, "
            f"need at least {minimum_nodes}"
        )

    dimensions = basis.dimensions
    index_set = (
        basis.index_set
        if basis.index_set.max_degree == N
        else build_index_set(dimensions, N)
    )
    vol_index_set = build_index_set(dimensions, K)
    solution_basis = basis.with_index_set(index_set)
    vol_basis = basis.with_index_set(vol_index_set)

    points, weights = solution_basis.tensor_quadrature(n_nodes)
    vol_values = vol_basis.evaluate(points)
    solution_values = solution_basis.evaluate(points)

    vol_pairs = vol_values[:, None, :] * vol_values[None, :, :]
    solution_pairs = solution_values[:, None, :] * solution_values[None, :, :] * weights
    values = np.tensordot(vol_pairs, solution_pairs, axes=([2], [2]))
    # exact under a<->b and g<->d, whatever order BLAS summed in
    values = 0.5 * (values + values.transpose(1, 0, 2, 3))
    values = 0.5 * (values + values.transpose(0, 1, 3, 2))
    # entries vanishing by orthogonality or parity come out as round-off
    values[np.abs(values) < ROUND_OFF] = 0.0

    logger.info(
        f"[galerkin_tensor] L={dimensions} K={K} N={N}: "
        f"{values.shape} tensor from {points.shape[0]} quadrature points"
    )
    return GalerkinTensor(
        families=tuple(basis.families),
        vol_index_set=vol_index_set,
        index_set=index_set,
        values=values,
        quadrature_nodes=n_nodes,
    )
