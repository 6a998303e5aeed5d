from __future__ import annotations

import numpy as np
import pandas as pd

from constants import DensityColumns
from domain.volatility.model import VolatilityModel, model_density
from infrastructure.storage.tables import build_frame


def density_table(
    model: VolatilityModel,
    samples: np.ndarray,
    bins: int = 40,
) -> pd.DataFrame:
    """Fitted density next to a histogram estimate at the bin centers."""
    samples = np.asarray(samples, dtype=float)
    histogram, edges = np.histogram(samples, bins=max(int(bins), 1), density=True)
    centers = 0.5 * (edges[:-1] + edges[1:])
    return build_frame(
        DensityColumns,
        {
            DensityColumns.VOL.name: centers,
            DensityColumns.FITTED_DENSITY.name: np.asarray(model_density(model, centers)),
            DensityColumns.HISTOGRAM_DENSITY.name: histogram,
        },
    )
