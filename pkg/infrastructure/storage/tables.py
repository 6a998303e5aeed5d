from __future__ import annotations

import logging
from pathlib import Path
from typing import Type

import numpy as np
import pandas as pd

from constants import (
    CSV_FLOAT_FORMAT,
    ImpliedVolInputColumns,
    PriceInputColumns,
    TableColumns,
)
from utils.exceptions import DataError

logger = logging.getLogger(__name__)

HEADER_LINES = 1


def build_frame(columns: Type[TableColumns], data: dict) -> pd.DataFrame:
    names = columns.get_all_names()
    missing = [name for name in names if name not in data]
    if missing:
        raise KeyError(f"Missing table columns {missing}")
    frame = pd.DataFrame({name: data[name] for name in names}, columns=names)
    for name, dtype in columns.dtypes().items():
        if dtype is not str:
            frame[name] = frame[name].astype(dtype)
    return frame


def write_table(frame: pd.DataFrame, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False, float_format=CSV_FLOAT_FORMAT)
    logger.info(f"[write_table] {len(frame)} rows written to {path}")
    return path


def read_table(path: str | Path, columns: Type[TableColumns]) -> pd.DataFrame:
    """Read a CSV with the given columns, reporting bad rows by file line."""
    path = Path(path)
    if not path.exists():
        raise DataError(f"Input table {path} does not exist")
    try:
        raw = pd.read_csv(path, dtype=str, skipinitialspace=True)
    except pd.errors.EmptyDataError:
        raise DataError(f"{path}: file is empty") from None
    except pd.errors.ParserError as e:
        raise DataError(f"{path}: {e}") from None

    names = columns.get_all_names()
    missing = [name for name in names if name not in raw.columns]
    if missing:
        raise DataError(f"{path}: line 1: missing columns {missing}")

    frame = pd.DataFrame(index=raw.index)
    for name, dtype in columns.dtypes().items():
        values = raw[name]
        if dtype is str:
            frame[name] = values.fillna("").astype(str)
            continue
        converted = pd.to_numeric(values, errors="coerce")
        bad = converted.isna() | ~np.isfinite(converted.fillna(0.0))
        if bad.any():
            row = int(np.flatnonzero(bad.to_numpy())[0])
            raise DataError(
                f"{path}: line {row + HEADER_LINES + 1}: "
                f"column '{name}' has non-numeric value {raw[name].iloc[row]!r}"
            )
        frame[name] = converted.astype(dtype)
    return frame


def detect_market_columns(path: str | Path) -> Type[TableColumns]:
    try:
        header = pd.read_csv(path, nrows=0, skipinitialspace=True)
    except (FileNotFoundError, pd.errors.EmptyDataError):
        raise DataError(f"Input table {path} is missing or empty") from None
    if ImpliedVolInputColumns.IMPLIED_VOL.name in header.columns:
        return ImpliedVolInputColumns
    return PriceInputColumns
