from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from application.sgsystem.coupling import (
    CouplingMatrix,
    ParabolicityReport,
    assemble_coupling,
    check_parabolic,
)
from application.sgsystem.option import OptionSpec
from domain.gpc.galerkin import GalerkinTensor
from domain.gpc.multiindex import IndexSet
from domain.volatility.model import VolatilityModel
from utils.exceptions import NonParabolicError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TransformedProblem:
    """Coefficient system for v(S, t) / (S + strike) on zeta in [0, 1], tau in [0, T]."""

    coupling: CouplingMatrix
    option: OptionSpec
    parabolicity: ParabolicityReport

    @property
    def A(self) -> np.ndarray:
        return self.coupling.matrix

    @property
    def model(self) -> VolatilityModel:
        return self.coupling.model

    @property
    def index_set(self) -> IndexSet:
        return self.coupling.index_set

    @property
    def size(self) -> int:
        return self.coupling.size

    @property
    def rate(self) -> float:
        return float(self.option.rate)

    @property
    def strike(self) -> float:
        return float(self.option.strike)

    @property
    def maturity_years(self) -> float:
        return self.option.maturity_years

    @staticmethod
    def diffusion(zeta: np.ndarray) -> np.ndarray:
        zeta = np.asarray(zeta, dtype=float)
        return 0.5 * zeta**2 * (1.0 - zeta) ** 2

    def drift(self, zeta: np.ndarray) -> np.ndarray:
        zeta = np.asarray(zeta, dtype=float)
        return self.rate * zeta * (1.0 - zeta)

    def reaction(self, zeta: np.ndarray) -> np.ndarray:
        return -self.rate * (1.0 - np.asarray(zeta, dtype=float))

    def initial_value(self, zeta: np.ndarray) -> np.ndarray:
        zeta = np.asarray(zeta, dtype=float)
        values = np.zeros(zeta.shape + (self.size,))
        values[..., 0] = np.maximum(2.0 * zeta - 1.0, 0.0)
        return values

    def lower_boundary(self) -> np.ndarray:
        return np.zeros(self.size)

    def upper_boundary(self) -> np.ndarray:
        values = np.zeros(self.size)
        values[0] = 1.0
        return values

    def to_record(self) -> dict:
        return {
            "option": self.option.to_record(),
            "model": self.model.to_record(),
            "N": self.index_set.max_degree,
            "basis_size": self.size,
            "parabolic": self.parabolicity.parabolic,
            "min_eigenvalue": self.parabolicity.min_real_eig,
            "max_eigenvalue": self.parabolicity.max_real_eig,
        }


def build_problem(
    model: VolatilityModel,
    option: OptionSpec,
    tensor: GalerkinTensor,
    index_set: IndexSet | None = None,
    allow_nonparabolic: bool = False,
) -> TransformedProblem:
    coupling = assemble_coupling(tensor, model, index_set)
    report = check_parabolic(coupling)
    if not report.parabolic:
        message = (
            f"Coupling matrix is not parabolic, min eigenvalue {report.min_real_eig:.6e} "
            f"for coefficients {model.coefficients.tolist()}"
        )
        if not allow_nonparabolic:
            raise NonParabolicError(message, report.min_real_eig)
        logger.warning(f"[build_problem] {message}; continuing on override")
    return TransformedProblem(coupling=coupling, option=option, parabolicity=report)


@dataclass(frozen=True)
class ProblemTemplate:
    """Everything of a problem except the volatility coefficients."""

    option: OptionSpec
    tensor: GalerkinTensor
    index_set: IndexSet
    allow_nonparabolic: bool = False

    def build(self, model: VolatilityModel) -> TransformedProblem:
        return build_problem(
            model,
            self.option,
            self.tensor,
            self.index_set,
            allow_nonparabolic=self.allow_nonparabolic,
        )

    def model_from_coefficients(self, coefficients) -> VolatilityModel:
        return VolatilityModel(
            self.tensor.families,
            self.tensor.vol_index_set,
            np.asarray(coefficients, dtype=float),
        )

    def to_record(self) -> dict:
        return {
            "option": self.option.to_record(),
            "L": self.index_set.dimensions,
            "K": self.tensor.vol_degree,
            "N": self.index_set.max_degree,
            "families": ",".join(family.label for family in self.tensor.families),
        }
