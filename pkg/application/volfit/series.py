from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import pandas as pd

from constants import DAYS_PER_YEAR, ImpliedVolInputColumns, PriceInputColumns
from domain.pricing.black_scholes import implied_vol
from infrastructure.storage.tables import detect_market_columns, read_table
from utils.exceptions import DataError, NoSolutionError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class VolObservation:
    date: str
    implied_vol: float
    spot: float = np.nan
    price: float = np.nan
    strike: float = np.nan
    maturity_years: float = np.nan
    rate: float = np.nan


@dataclass(frozen=True)
class ImpliedVolSeries:
    observations: tuple[VolObservation, ...]
    inverted: bool

    def __len__(self) -> int:
        return len(self.observations)

    @property
    def values(self) -> np.ndarray:
        return np.array([observation.implied_vol for observation in self.observations])

    @property
    def dates(self) -> list[str]:
        return [observation.date for observation in self.observations]


def series_from_prices(frame: pd.DataFrame, source: str = "<frame>") -> ImpliedVolSeries:
    observations = []
    for row, record in enumerate(frame.itertuples(index=False)):
        maturity_years = float(record.maturity_days) / DAYS_PER_YEAR
        try:
            vol = implied_vol(
                float(record.price),
                float(record.spot),
                maturity_years,
                float(record.strike),
                float(record.rate),
            )
        except NoSolutionError as e:
            raise NoSolutionError(f"{source}: line {row + 2}: {e}") from None
        observations.append(
            VolObservation(
                date=str(record.date),
                implied_vol=vol,
                spot=float(record.spot),
                price=float(record.price),
                strike=float(record.strike),
                maturity_years=maturity_years,
                rate=float(record.rate),
            )
        )
    return ImpliedVolSeries(tuple(observations), inverted=True)


def load_series(path: str | Path) -> ImpliedVolSeries:
    """Implied volatilities from a price table or an implied_vol table."""
    columns = detect_market_columns(path)
    frame = read_table(path, columns)
    if columns is ImpliedVolInputColumns:
        vols = frame[ImpliedVolInputColumns.IMPLIED_VOL.name].to_numpy(dtype=float)
        non_positive = np.flatnonzero(vols <= 0)
        if non_positive.size:
            raise DataError(
                f"{path}: line {non_positive[0] + 2}: implied vol must be positive"
            )
        series = ImpliedVolSeries(
            tuple(
                VolObservation(date=str(date), implied_vol=float(vol))
                for date, vol in zip(frame[ImpliedVolInputColumns.DATE.name], vols)
            ),
            inverted=False,
        )
    else:
        series = series_from_prices(frame, source=str(path))
    logger.info(
        f"[load_series] {len(series)} observations from {path} "
        f"({'inverted from prices' if series.inverted else 'implied vols given'})"
    )
    return series


def load_price_table(path: str | Path) -> pd.DataFrame:
    return read_table(path, PriceInputColumns)
