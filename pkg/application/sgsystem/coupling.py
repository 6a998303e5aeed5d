from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from domain.gpc.galerkin import GalerkinTensor
from domain.gpc.multiindex import IndexSet
from domain.volatility.model import VolatilityModel
from utils.exceptions import ConfigurationError, NumericalCorruptionError

logger = logging.getLogger(__name__)

SYMMETRY_TOLERANCE = 1e-10
POSITIVE_EIGENVALUE = 1e-12


@dataclass(frozen=True)
class CouplingMatrix:
    matrix: np.ndarray
    index_set: IndexSet
    model: VolatilityModel

    @property
    def size(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True)
class ParabolicityReport:
    parabolic: bool
    min_real_eig: float
    max_real_eig: float


def _check_compatible(tensor: GalerkinTensor, model: VolatilityModel, index_set: IndexSet):
    if tensor.dimensions != model.dimensions or index_set.dimensions != model.dimensions:
        raise ConfigurationError(
            f"Dimension mismatch: tensor L={tensor.dimensions}, model L={model.dimensions}, "
            f"index set L={index_set.dimensions}"
        )
    if tuple(family.label for family in tensor.families) != tuple(family.label for family in model.families):
        raise ConfigurationError(
            f"Tensor families {[f.label for f in tensor.families]} differ from "
            f"model families {[f.label for f in model.families]}"
        )
    if model.vol_degree > tensor.vol_degree:
        raise ConfigurationError(
            f"Tensor built for K={tensor.vol_degree}, model has K={model.vol_degree}"
        )
    if index_set.max_degree > tensor.solution_degree:
        raise ConfigurationError(
            f"Tensor built for N={tensor.solution_degree}, index set has N={index_set.max_degree}"
        )


def assemble_coupling(
    tensor: GalerkinTensor,
    model: VolatilityModel,
    index_set: IndexSet | None = None,
) -> CouplingMatrix:
    """A[n, l] = sum_{a,b} sigma_a sigma_b M[a, b, l, n]."""
    index_set = tensor.index_set if index_set is None else index_set
    _check_compatible(tensor, model, index_set)

    # graded order makes a lower-degree set a prefix of a higher-degree one
    size = index_set.size
    values = tensor.values[: model.vol_index_set.size, : model.vol_index_set.size, :size, :size]
    sigma = model.coefficients
    matrix = np.tensordot(np.outer(sigma, sigma), values, axes=([0, 1], [0, 1])).T

    asymmetry = float(np.max(np.abs(matrix - matrix.T))) if size > 1 else 0.0
    if asymmetry > SYMMETRY_TOLERANCE:
        raise NumericalCorruptionError(f"Coupling matrix asymmetric by {asymmetry:.3e}")
    matrix = 0.5 * (matrix + matrix.T)
    matrix.setflags(write=False)
    return CouplingMatrix(matrix=matrix, index_set=index_set, model=model)


def check_parabolic(coupling: CouplingMatrix | np.ndarray) -> ParabolicityReport:
    matrix = coupling.matrix if isinstance(coupling, CouplingMatrix) else np.asarray(coupling, dtype=float)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise ConfigurationError(f"Coupling matrix must be square, got shape {matrix.shape}")
    try:
        if np.array_equal(matrix, matrix.T):
            eigenvalues = np.linalg.eigvalsh(matrix)
        else:
            eigenvalues = np.real(np.linalg.eigvals(matrix))
    except np.linalg.LinAlgError as e:
        raise NumericalCorruptionError(f"Eigenvalue computation failed: {e}") from None
    if not np.all(np.isfinite(eigenvalues)):
        raise NumericalCorruptionError("Eigenvalues of the coupling matrix are not finite")
    min_eig = float(np.min(eigenvalues))
    return ParabolicityReport(
        parabolic=min_eig > POSITIVE_EIGENVALUE,
        min_real_eig=min_eig,
        max_real_eig=float(np.max(eigenvalues)),
    )
