from __future__ import annotations

import logging
from pathlib import Path
from typing import Any, Mapping, Optional

from PySide6.QtCore import QSettings

from store.config import (
    CONFIG_KEY_MAP,
    CONFIG_KEYS,
    BenchConfig,
    BifidConfig,
    ConfigKey,
    FitConfig,
    GridConfig,
    OptionConfig,
    OutputConfig,
    RunConfig,
    UncertaintyConfig,
    VolatilityConfig,
    parse_coefficients,
)
from utils.exceptions import ConfigurationError

logger = logging.getLogger(__name__)

TRUE_VALUES = ("true", "1", "yes", "on")
FALSE_VALUES = ("false", "0", "no", "off")


def convert_value(item: ConfigKey, value: Any) -> Any:
    # QSettings returns comma separated INI values as lists
    if isinstance(value, (list, tuple)):
        value = ",".join(str(part) for part in value)
    if item.type is bool:
        if isinstance(value, bool):
            return value
        text = str(value).strip().lower()
        if text in TRUE_VALUES:
            return True
        if text in FALSE_VALUES:
            return False
        raise ConfigurationError(f"{item.key}: expected true or false, got {value!r}")
    try:
        return item.type(value)
    except (TypeError, ValueError):
        raise ConfigurationError(
            f"{item.key}: expected {item.type.__name__}, got {value!r}"
        ) from None


def read_values(path: Optional[str | Path], overrides: Optional[Mapping[str, Any]] = None) -> dict[str, Any]:
    """Raw key values: override, then INI file, then default."""
    overrides = {key: value for key, value in (overrides or {}).items() if value is not None}
    unknown = sorted(set(overrides) - set(CONFIG_KEY_MAP))
    if unknown:
        raise ConfigurationError(f"Unknown configuration keys {unknown}")

    settings = None
    if path:
        if not Path(path).exists():
            raise ConfigurationError(f"Configuration file {path} does not exist")
        settings = QSettings(str(path), QSettings.Format.IniFormat)

    values = {}
    for item in CONFIG_KEYS:
        if item.key in overrides:
            raw = overrides[item.key]
        elif settings is not None:
            raw = settings.value(item.key, item.default)
        else:
            raw = item.default
        values[item.key] = convert_value(item, raw)
    return values


def _require(condition: bool, message: str):
    if not condition:
        raise ConfigurationError(message)


def _validate(config: RunConfig):
    _require(config.option.type == "call", f"option/type: only 'call' is supported, got {config.option.type!r}")
    _require(config.option.strike > 0, f"option/strike must be positive, got {config.option.strike}")
    _require(config.option.maturity_days > 0, f"option/maturity_days must be positive, got {config.option.maturity_days}")
    _require(config.uncertainty.vol_degree >= 0, "uncertainty/vol_degree must be nonnegative")
    _require(config.uncertainty.solution_degree >= 0, "uncertainty/solution_degree must be nonnegative")
    _require(config.uncertainty.quadrature_nodes >= 0, "uncertainty/quadrature_nodes must be nonnegative")
    for name in ("m_zeta", "low_m_zeta", "high_m_zeta"):
        section = config.grid if name == "m_zeta" else config.bifid
        _require(getattr(section, name) >= 2, f"{name} must be at least 2")
    for name, value in (
        ("grid/n_tau", config.grid.n_tau),
        ("grid/time_thinning", config.grid.time_thinning),
        ("bifid/low_n_tau", config.bifid.low_n_tau),
        ("bifid/high_n_tau", config.bifid.high_n_tau),
        ("bifid/high_time_thinning", config.bifid.high_time_thinning),
        ("bifid/budget", config.bifid.budget),
        ("bifid/random_points", config.bifid.random_points),
        ("bifid/workers", config.bifid.workers),
        ("bench/models", config.bench.models),
        ("fit/histogram_bins", config.fit.histogram_bins),
    ):
        _require(value >= 1, f"{name} must be positive, got {value}")
    _require(config.bifid.sampling in ("grid", "random"), f"bifid/sampling must be grid or random, got {config.bifid.sampling!r}")
    _require(config.fit.mode in ("mean_variance", "mean_only"), f"fit/mode must be mean_variance or mean_only, got {config.fit.mode!r}")
    _require(config.bifid.tolerance >= 0, "bifid/tolerance must be nonnegative")
    for key, value in (
        ("volatility/fit_input", config.volatility.fit_input),
        ("grid/market_input", config.grid.market_input),
    ):
        _require(not value or Path(value).exists(), f"{key}: {value} does not exist")


def load_run_config(path: Optional[str | Path] = None, overrides: Optional[Mapping[str, Any]] = None) -> RunConfig:
    values = read_values(path, overrides)
    try:
        coefficients = parse_coefficients(values["volatility/coefficients"])
    except ValueError:
        raise ConfigurationError(
            f"volatility/coefficients: not a list of numbers: {values['volatility/coefficients']!r}"
        ) from None

    def section(name: str) -> dict[str, Any]:
        prefix = name + "/"
        return {key[len(prefix):]: value for key, value in values.items() if key.startswith(prefix)}

    config = RunConfig(
        option=OptionConfig(**section("option")),
        uncertainty=UncertaintyConfig(**section("uncertainty")),
        volatility=VolatilityConfig(coefficients=coefficients, fit_input=values["volatility/fit_input"]),
        grid=GridConfig(**section("grid")),
        bifid=BifidConfig(**section("bifid")),
        bench=BenchConfig(**section("bench")),
        fit=FitConfig(**section("fit")),
        output=OutputConfig(**section("output")),
    )
    _validate(config)
    logger.debug(f"[load_run_config] configuration loaded from {path or 'defaults'}")
    return config
