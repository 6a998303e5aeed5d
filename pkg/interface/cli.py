from __future__ import annotations

import argparse
import logging
import time
from pathlib import Path
from typing import Sequence

import numpy as np

from application.bifidelity.benchmark import run_benchmark
from application.bifidelity.offline import run_offline
from application.bifidelity.online import online_reconstruct, store_grids
from application.bifidelity.sampling import build_sample_grid, random_sample_points, sample_bounds
from application.fdsolver.grid import GridSpec
from application.fdsolver.moments import (
    MomentSurfaces,
    evaluate_at,
    moments,
    smoothing_area,
    surface_frame,
)
from application.fdsolver.planning import estimate_solution_bytes, plan_memory
from application.fdsolver.scheme import SolutionField, solve
from application.sgsystem.option import OptionSpec
from application.sgsystem.problem import ProblemTemplate, build_problem
from application.volfit.density import density_table
from application.volfit.mle import fit_constrained_mle
from application.volfit.series import load_price_table, load_series
from constants import (
    DAYS_PER_YEAR,
    ImpliedVolInputColumns,
    MarketComparisonColumns,
    PriceInputColumns,
)
from domain.gpc.galerkin import GalerkinTensor
from domain.gpc.orthopoly import parse_families
from domain.pricing.black_scholes import bs_closed_form, implied_vol
from domain.volatility.model import VolatilityModel
from infrastructure.storage.bifid_store import load_store, save_store
from infrastructure.storage.tables import build_frame, write_table
from infrastructure.storage.tensor_cache import obtain_tensor, save_tensor
from interface.log import configure_logging, log_progress
from store.config import CONFIG_KEYS, RunConfig
from store.data import RunRecord
from store.state import load_run_config
from utils.exceptions import ConfigurationError, handle_cli_errors
from utils.functions import convert_seconds

logger = logging.getLogger(__name__)

FITTED_MODEL_FILE = "fitted_model.json"
DENSITY_FILE = "density.csv"
IMPLIED_VOLS_FILE = "implied_vols.csv"
SURFACE_FILE = "surface.csv"
SOLVE_MANIFEST_FILE = "solve_manifest.json"
MARKET_FILE = "market_comparison.csv"
TENSOR_DIRECTORY = "tensor"
ONLINE_SURFACE_FILE = "bifid_surface.csv"
ONLINE_MANIFEST_FILE = "bifid_online_manifest.json"
BENCHMARK_FILE = "benchmark.csv"
BENCHMARK_MANIFEST_FILE = "benchmark_manifest.json"


def _output_dir(config: RunConfig) -> Path:
    directory = Path(config.output.directory)
    directory.mkdir(parents=True, exist_ok=True)
    return directory


def _option(config: RunConfig) -> OptionSpec:
    return OptionSpec(
        strike=config.option.strike,
        maturity_days=config.option.maturity_days,
        rate=config.option.rate,
        type=config.option.type,
    )


def _tensor(config: RunConfig) -> GalerkinTensor:
    return obtain_tensor(
        parse_families(config.uncertainty.families),
        config.uncertainty.vol_degree,
        config.uncertainty.solution_degree,
        config.uncertainty.quadrature_nodes,
        cache_dir=config.output.tensor_cache or None,
    )


def _template(config: RunConfig, tensor: GalerkinTensor | None = None) -> ProblemTemplate:
    tensor = tensor or _tensor(config)
    return ProblemTemplate(
        option=_option(config),
        tensor=tensor,
        index_set=tensor.index_set,
        allow_nonparabolic=config.grid.allow_nonparabolic,
    )


def _fit(config: RunConfig):
    if not config.volatility.fit_input:
        raise ConfigurationError("volatility/fit_input is required to fit a model")
    series = load_series(config.volatility.fit_input)
    return series, fit_constrained_mle(series.values, config.uncertainty.families, config.fit.mode)


def _model(config: RunConfig) -> VolatilityModel:
    if not config.volatility.coefficients:
        _, result = _fit(config)
        return result.model
    return VolatilityModel.build(
        config.uncertainty.families,
        config.uncertainty.vol_degree,
        config.volatility.coefficients,
    )


def _low_grid(config: RunConfig) -> GridSpec:
    return GridSpec(config.bifid.low_m_zeta, config.bifid.low_n_tau)


def _high_grid(config: RunConfig) -> GridSpec:
    return GridSpec(config.bifid.high_m_zeta, config.bifid.high_n_tau, config.bifid.high_time_thinning)


@handle_cli_errors
def cmd_fit(config: RunConfig):
    started = time.perf_counter()
    series, result = _fit(config)
    directory = _output_dir(config)
    record = RunRecord("fit", config.to_record())
    record.add(fit=result.to_record(), observations=len(series), inverted=series.inverted)

    write_table(density_table(result.model, series.values, config.fit.histogram_bins), directory / DENSITY_FILE)
    record.add_output("density", DENSITY_FILE)
    if series.inverted:
        frame = build_frame(
            ImpliedVolInputColumns,
            {
                ImpliedVolInputColumns.DATE.name: series.dates,
                ImpliedVolInputColumns.IMPLIED_VOL.name: series.values,
            },
        )
        write_table(frame, directory / IMPLIED_VOLS_FILE)
        record.add_output("implied_vols", IMPLIED_VOLS_FILE)
    record.save(directory / FITTED_MODEL_FILE)
    logger.info(
        f"[cmd_fit] orthonormal {result.model.coefficients.tolist()}, "
        f"raw {result.model.raw_coefficients().tolist()} in {convert_seconds(time.perf_counter() - started)}"
    )


def market_comparison(field: SolutionField, model: VolatilityModel, path: str | Path):
    """Market prices against the mean plus-minus one standard deviation band."""
    prices = load_price_table(path)
    option = field.problem.option
    remaining = prices[PriceInputColumns.MATURITY_DAYS.name].to_numpy(dtype=float)
    inside = (remaining >= 0) & (remaining <= option.maturity_days)
    if not inside.all():
        logger.warning(f"[market_comparison] {int((~inside).sum())} quotes outside the option lifetime skipped")
    prices = prices[inside]
    strikes = prices[PriceInputColumns.STRIKE.name].to_numpy(dtype=float)
    if np.any(strikes != option.strike):
        logger.warning(f"[market_comparison] quotes with strikes other than {option.strike} compared anyway")

    spot = prices[PriceInputColumns.SPOT.name].to_numpy(dtype=float)
    t_days = option.maturity_days - prices[PriceInputColumns.MATURITY_DAYS.name].to_numpy(dtype=float)
    mean, variance = evaluate_at(field, spot, t_days)
    std = np.sqrt(variance)
    market = prices[PriceInputColumns.PRICE.name].to_numpy(dtype=float)
    reference = np.asarray(
        bs_closed_form(spot, (option.maturity_days - t_days) / DAYS_PER_YEAR, option.strike, option.rate, model.mean)
    )
    return build_frame(
        MarketComparisonColumns,
        {
            MarketComparisonColumns.DATE.name: prices[PriceInputColumns.DATE.name].to_numpy(),
            MarketComparisonColumns.T_DAYS.name: t_days,
            MarketComparisonColumns.S.name: spot,
            MarketComparisonColumns.MARKET.name: market,
            MarketComparisonColumns.MEAN.name: mean,
            MarketComparisonColumns.STD.name: std,
            MarketComparisonColumns.LOWER.name: mean - std,
            MarketComparisonColumns.UPPER.name: mean + std,
            MarketComparisonColumns.REFERENCE.name: reference,
            MarketComparisonColumns.INSIDE_BAND.name: (market >= mean - std) & (market <= mean + std),
        },
    )


def _write_surfaces(
    record: RunRecord,
    surfaces: MomentSurfaces,
    model: VolatilityModel,
    directory: Path,
    filename: str,
    include_reference: bool,
):
    frame = surface_frame(surfaces, model.mean if include_reference else None)
    write_table(frame, directory / filename)
    record.add_output("surface", filename)
    record.add(
        smoothing_area=smoothing_area(surfaces).to_record(),
        asymptote_slope=surfaces.asymptote_slope,
    )


@handle_cli_errors
def cmd_solve(config: RunConfig):
    started = time.perf_counter()
    model = _model(config)
    tensor = _tensor(config)
    problem = build_problem(
        model, _option(config), tensor, tensor.index_set, allow_nonparabolic=config.grid.allow_nonparabolic
    )
    grid = GridSpec(config.grid.m_zeta, config.grid.n_tau, config.grid.time_thinning)
    plan_memory(estimate_solution_bytes(grid, problem.size), "solve")
    field = solve(problem, grid, allow_unstable=config.grid.allow_unstable)
    surfaces = moments(field)

    directory = _output_dir(config)
    record = RunRecord("solve", config.to_record())
    record.add(problem=problem.to_record(), grid=grid.to_record(), stability=field.stability.to_record())
    _write_surfaces(record, surfaces, model, directory, SURFACE_FILE, config.grid.include_reference)
    if config.grid.market_input:
        write_table(market_comparison(field, model, config.grid.market_input), directory / MARKET_FILE)
        record.add_output("market_comparison", MARKET_FILE)
    record.add(seconds=time.perf_counter() - started)
    record.save(directory / SOLVE_MANIFEST_FILE)
    logger.info(f"[cmd_solve] surfaces written to {directory} in {convert_seconds(time.perf_counter() - started)}")


@handle_cli_errors
def cmd_tensor(config: RunConfig):
    tensor = _tensor(config)
    target = Path(config.output.tensor_cache) if config.output.tensor_cache else _output_dir(config) / TENSOR_DIRECTORY
    if not config.output.tensor_cache:
        save_tensor(target, tensor)
    logger.info(f"[cmd_tensor] tensor of shape {tensor.values.shape} in {target}")


def _sample_grid(config: RunConfig):
    bounds = sample_bounds(config.bifid.sigma00_max, config.bifid.step, config.uncertainty.families)
    if config.bifid.sampling == "random":
        return random_sample_points(config.bifid.random_points, np.random.default_rng(config.bench.seed), bounds)
    return build_sample_grid(bounds)


def _check_bifid_basis(config: RunConfig):
    if config.uncertainty.vol_degree != 1 or len(parse_families(config.uncertainty.families)) != 2:
        raise ConfigurationError("Bi-fidelity runs need two random variables and vol_degree 1")


@handle_cli_errors
def cmd_bifid_offline(config: RunConfig):
    _check_bifid_basis(config)
    started = time.perf_counter()
    template = _template(config)
    sample_grid = _sample_grid(config)
    logger.info(f"[cmd_bifid_offline] {len(sample_grid)} sample points ({config.bifid.sampling})")
    store = run_offline(
        sample_grid,
        template,
        _low_grid(config),
        _high_grid(config),
        budget=config.bifid.budget,
        tolerance=config.bifid.tolerance,
        workers=config.bifid.workers,
        progress=log_progress,
        memmap_dir=Path(config.bifid.store) / "scratch",
    )
    store.manifest["seconds"] = time.perf_counter() - started
    save_store(config.bifid.store, store)


@handle_cli_errors
def cmd_bifid_online(config: RunConfig):
    _check_bifid_basis(config)
    store = load_store(config.bifid.store)
    template = _template(config)
    coefficients = np.asarray(config.volatility.coefficients, dtype=float)
    reconstruction = online_reconstruct(store, coefficients, template, _low_grid(config))
    surfaces = moments(reconstruction.field)

    directory = _output_dir(config)
    record = RunRecord("bifid online", config.to_record())
    record.add(
        problem=reconstruction.field.problem.to_record(),
        residual=reconstruction.residual,
        exact_match=reconstruction.exact_match,
        weights=reconstruction.weights,
        phase_seconds=reconstruction.phase_seconds(),
        seconds=reconstruction.total_seconds,
        high_grid=store_grids(store)[1].to_record(),
    )
    _write_surfaces(record, surfaces, template.model_from_coefficients(coefficients), directory, ONLINE_SURFACE_FILE, config.grid.include_reference)
    record.save(directory / ONLINE_MANIFEST_FILE)
    logger.info(
        f"[cmd_bifid_online] residual {reconstruction.residual:.3e}, exact match {reconstruction.exact_match}, "
        f"{reconstruction.total_seconds:.3f} s"
    )


@handle_cli_errors
def cmd_bench(config: RunConfig):
    _check_bifid_basis(config)
    store = load_store(config.bifid.store)
    template = _template(config)
    report = run_benchmark(
        store,
        template,
        models=config.bench.models,
        seed=config.bench.seed,
        bounds=sample_bounds(config.bifid.sigma00_max, config.bifid.step, config.uncertainty.families),
        near_strike_band=config.bench.near_strike_band,
        progress=log_progress,
    )
    directory = _output_dir(config)
    write_table(report.table, directory / BENCHMARK_FILE)
    record = RunRecord("bench", config.to_record())
    record.add(summary=report.summary, phase_seconds=report.phase_seconds).add_output("benchmark", BENCHMARK_FILE)
    record.save(directory / BENCHMARK_MANIFEST_FILE)


@handle_cli_errors
def cmd_implied_vol(config: RunConfig, price: float, spot: float):
    vol = implied_vol(
        price,
        spot,
        config.option.maturity_days / DAYS_PER_YEAR,
        config.option.strike,
        config.option.rate,
    )
    logger.info(f"[cmd_implied_vol] price {price} at spot {spot}: implied vol {vol:.10f}")
    print(f"{vol:.12f}")


def _config_parent() -> argparse.ArgumentParser:
    parent = argparse.ArgumentParser(add_help=False)
    parent.add_argument("--config", help="INI file with section/key settings")
    parent.add_argument("--log-level", default="INFO", help="logging level")
    group = parent.add_argument_group("configuration overrides")
    for item in CONFIG_KEYS:
        group.add_argument(
            item.flag,
            dest=item.key,
            default=None,
            metavar=item.type.__name__.upper(),
            help=f"{item.help} (default {item.default!r})",
        )
    return parent


def build_parser() -> argparse.ArgumentParser:
    parent = _config_parent()
    parser = argparse.ArgumentParser(
        prog="uvbs",
        description="Black-Scholes pricing with uncertain volatility by stochastic Galerkin",
    )
    commands = parser.add_subparsers(dest="command", required=True)
    commands.add_parser("fit", parents=[parent], help="fit the volatility model to market data")
    commands.add_parser("solve", parents=[parent], help="solve and write mean and variance surfaces")
    commands.add_parser("tensor", parents=[parent], help="build and cache the Galerkin tensor")
    bifid = commands.add_parser("bifid", help="bi-fidelity offline and online phases")
    phases = bifid.add_subparsers(dest="phase", required=True)
    phases.add_parser("offline", parents=[parent], help="build the snapshot store")
    phases.add_parser("online", parents=[parent], help="reconstruct at volatility/coefficients")
    commands.add_parser("bench", parents=[parent], help="benchmark the store against direct solves")
    implied = commands.add_parser("implied-vol", parents=[parent], help="invert one call price")
    implied.add_argument("--price", type=float, required=True)
    implied.add_argument("--spot", type=float, required=True)
    return parser


def _overrides(arguments: argparse.Namespace) -> dict:
    values = vars(arguments)
    return {item.key: values.get(item.key) for item in CONFIG_KEYS if values.get(item.key) is not None}


def main(argv: Sequence[str] | None = None) -> int:
    arguments = build_parser().parse_args(argv)
    configure_logging(arguments.log_level)
    try:
        config = load_run_config(arguments.config, _overrides(arguments))
    except ConfigurationError as e:
        logger.error(f"[main] {e.__class__.__name__}: {e}")
        return e.exit_code

    if arguments.command == "fit":
        return cmd_fit(config)
    if arguments.command == "solve":
        return cmd_solve(config)
    if arguments.command == "tensor":
        return cmd_tensor(config)
    if arguments.command == "bifid":
        return cmd_bifid_offline(config) if arguments.phase == "offline" else cmd_bifid_online(config)
    if arguments.command == "bench":
        return cmd_bench(config)
    return cmd_implied_vol(config, arguments.price, arguments.spot)
