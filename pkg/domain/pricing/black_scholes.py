from __future__ import annotations

import logging

import numpy as np
from scipy.optimize import brentq
from scipy.stats import norm

from utils.exceptions import NoSolutionError

logger = logging.getLogger(__name__)

VOL_BRACKET = (1e-6, 5.0)
PRICE_TOLERANCE = 1e-10


def bs_closed_form(S, t, strike, r, sigma):
    """European call price, vectorized over S, t and sigma."""
    S, t, sigma = np.broadcast_arrays(
        np.asarray(S, dtype=float), np.asarray(t, dtype=float), np.asarray(sigma, dtype=float)
    )
    strike = float(strike)
    r = float(r)
    discounted = strike * np.exp(-r * t)
    intrinsic = np.maximum(S - discounted, 0.0)

    spread = sigma * np.sqrt(t)
    regular = (spread > 0) & (S > 0)
    safe_spread = np.where(regular, spread, 1.0)
    safe_S = np.where(regular, S, 1.0)
    with np.errstate(divide="ignore"):
        d1 = (np.log(safe_S / strike) + (r + 0.5 * sigma**2) * t) / safe_spread
    d2 = d1 - safe_spread
    price = np.where(
        regular,
        S * norm.cdf(d1) - discounted * norm.cdf(d2),
        intrinsic,
    )
    return float(price) if price.ndim == 0 else price


def vega(S: float, t: float, strike: float, r: float, sigma: float) -> float:
    if sigma <= 0 or t <= 0 or S <= 0:
        return 0.0
    spread = sigma * np.sqrt(t)
    d1 = (np.log(S / strike) + (r + 0.5 * sigma**2) * t) / spread
    return float(S * norm.pdf(d1) * np.sqrt(t))


def implied_vol(
    market_price: float,
    S: float,
    t: float,
    strike: float,
    r: float,
) -> float:
    """Volatility reproducing market_price, bracketed on [1e-6, 5]."""
    lower_bound = max(S - strike * np.exp(-r * t), 0.0)
    if t <= 0 or not lower_bound < market_price < S:
        raise NoSolutionError(
            f"Price {market_price} outside the no-arbitrage interval ({lower_bound}, {S})"
        )

    low, high = VOL_BRACKET

    def objective(sigma: float) -> float:
        return bs_closed_form(S, t, strike, r, sigma) - market_price

    f_low = objective(low)
    f_high = objective(high)
    if f_low >= 0:
        logger.debug(f"[implied_vol] price {market_price} at the lower vol limit")
        return low
    if f_high < 0:
        raise NoSolutionError(
            f"Price {market_price} above the call price at vol {high}"
        )

    sigma = brentq(objective, low, high, xtol=1e-14, rtol=1e-14, maxiter=200)
    for _ in range(5):
        residual = objective(sigma)
        if abs(residual) <= PRICE_TOLERANCE:
            break
        slope = vega(S, t, strike, r, sigma)
        if slope <= 0:
            break
        candidate = sigma - residual / slope
        if not low <= candidate <= high:
            break
        sigma = candidate
    return float(sigma)
