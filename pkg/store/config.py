from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Any


@dataclass(frozen=True)
class ConfigKey:
    key: str
    type: type
    default: Any
    help: str

    @property
    def section(self) -> str:
        return self.key.split("/", 1)[0]

    @property
    def flag(self) -> str:
        return "--" + self.key.replace("/", "-").replace("_", "-")


CONFIG_KEYS: tuple[ConfigKey, ...] = (
    ConfigKey("option/type", str, "call", "option type (call)"),
    ConfigKey("option/strike", float, 100.0, "strike price"),
    ConfigKey("option/maturity_days", float, 20.0, "maturity in trading days"),
    ConfigKey("option/rate", float, 0.0, "risk-free rate per year"),
    ConfigKey("uncertainty/families", str, "normal,uniform:0.5", "distribution of each random variable"),
    ConfigKey("uncertainty/vol_degree", int, 1, "volatility truncation degree K"),
    ConfigKey("uncertainty/solution_degree", int, 5, "solution truncation degree N"),
    ConfigKey("uncertainty/quadrature_nodes", int, 0, "Gauss nodes per dimension, 0 for K+N+1"),
    ConfigKey("volatility/coefficients", str, "0.5,0.2,0.1", "orthonormal volatility coefficients in index-set order"),
    ConfigKey("volatility/fit_input", str, "", "market CSV to fit the volatility model from"),
    ConfigKey("grid/m_zeta", int, 200, "zeta intervals"),
    ConfigKey("grid/n_tau", int, 319, "time steps"),
    ConfigKey("grid/time_thinning", int, 1, "store every k-th time level"),
    ConfigKey("grid/allow_nonparabolic", bool, False, "solve non-parabolic systems anyway"),
    ConfigKey("grid/allow_unstable", bool, False, "march unstable grids anyway"),
    ConfigKey("grid/include_reference", bool, False, "add the constant-volatility reference column"),
    ConfigKey("grid/market_input", str, "", "price CSV to compare the solution with"),
    ConfigKey("bifid/low_m_zeta", int, 50, "low-fidelity zeta intervals"),
    ConfigKey("bifid/low_n_tau", int, 150, "low-fidelity time steps"),
    ConfigKey("bifid/high_m_zeta", int, 175, "high-fidelity zeta intervals"),
    ConfigKey("bifid/high_n_tau", int, 1500, "high-fidelity time steps"),
    ConfigKey("bifid/high_time_thinning", int, 1, "store every k-th high-fidelity time level"),
    ConfigKey("bifid/budget", int, 40, "number of selected points"),
    ConfigKey("bifid/tolerance", float, 0.0, "relative distance that ends the selection early"),
    ConfigKey("bifid/sigma00_max", float, 0.8, "largest mean volatility of the sample region"),
    ConfigKey("bifid/step", float, 0.05, "raw coefficient step of the sample grid"),
    ConfigKey("bifid/sampling", str, "grid", "sample points from a grid or at random"),
    ConfigKey("bifid/random_points", int, 400, "number of random sample points"),
    ConfigKey("bifid/store", str, "bifid_store", "store directory"),
    ConfigKey("bifid/workers", int, 1, "parallel solves"),
    ConfigKey("bench/models", int, 20, "random models in the benchmark"),
    ConfigKey("bench/seed", int, 0, "seed of all random draws"),
    ConfigKey("bench/near_strike_band", float, 0.2, "relative half width of the near-strike region"),
    ConfigKey("fit/mode", str, "mean_variance", "mean_variance or mean_only"),
    ConfigKey("fit/histogram_bins", int, 40, "bins of the histogram density"),
    ConfigKey("output/directory", str, "output", "directory for tables and manifests"),
    ConfigKey("output/tensor_cache", str, "", "directory caching the Galerkin tensor"),
)

CONFIG_KEY_MAP = {item.key: item for item in CONFIG_KEYS}


@dataclass(frozen=True)
class OptionConfig:
    type: str
    strike: float
    maturity_days: float
    rate: float


@dataclass(frozen=True)
class UncertaintyConfig:
    families: str
    vol_degree: int
    solution_degree: int
    quadrature_nodes: int


@dataclass(frozen=True)
class VolatilityConfig:
    coefficients: tuple[float, ...]
    fit_input: str


@dataclass(frozen=True)
class GridConfig:
    m_zeta: int
    n_tau: int
    time_thinning: int
    allow_nonparabolic: bool
    allow_unstable: bool
    include_reference: bool
    market_input: str


@dataclass(frozen=True)
class BifidConfig:
    low_m_zeta: int
    low_n_tau: int
    high_m_zeta: int
    high_n_tau: int
    high_time_thinning: int
    budget: int
    tolerance: float
    sigma00_max: float
    step: float
    sampling: str
    random_points: int
    store: str
    workers: int


@dataclass(frozen=True)
class BenchConfig:
    models: int
    seed: int
    near_strike_band: float


@dataclass(frozen=True)
class FitConfig:
    mode: str
    histogram_bins: int


@dataclass(frozen=True)
class OutputConfig:
    directory: str
    tensor_cache: str


@dataclass(frozen=True)
class RunConfig:
    option: OptionConfig
    uncertainty: UncertaintyConfig
    volatility: VolatilityConfig
    grid: GridConfig
    bifid: BifidConfig
    bench: BenchConfig
    fit: FitConfig
    output: OutputConfig

    def to_record(self) -> dict:
        return asdict(self)


def parse_coefficients(raw_value) -> tuple[float, ...]:
    if isinstance(raw_value, (list, tuple)):
        items = [str(item) for item in raw_value]
    else:
        items = str(raw_value).replace(" ", "").split(",")
    return tuple(float(item) for item in items if item)
