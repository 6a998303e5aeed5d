from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from constants import DAYS_PER_YEAR
from utils.exceptions import ConfigurationError


class OptionType(Enum):
    CALL = "call"


@dataclass(frozen=True)
class OptionSpec:
    strike: float
    maturity_days: float
    rate: float = 0.0
    type: OptionType = OptionType.CALL

    def __post_init__(self):
        if not self.strike > 0:
            raise ConfigurationError(f"Strike must be positive, got {self.strike}")
        if not self.maturity_days > 0:
            raise ConfigurationError(f"Maturity must be positive, got {self.maturity_days} days")
        object.__setattr__(self, "type", OptionType(self.type))

    @property
    def maturity_years(self) -> float:
        return float(self.maturity_days) / DAYS_PER_YEAR

    def to_record(self) -> dict:
        return {
            "type": self.type.value,
            "strike": float(self.strike),
            "maturity_days": float(self.maturity_days),
            "rate": float(self.rate),
        }
