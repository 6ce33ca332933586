"""Contract records for continuously monitored geometric Asian payoffs."""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

__all__ = ["PayoffKind", "ContractSpec"]


class PayoffKind(str, Enum):
    AVERAGE_PRICE_CALL = "AveragePriceCall"
    AVERAGE_PRICE_PUT = "AveragePricePut"
    AVERAGE_STRIKE_CALL = "AverageStrikeCall"
    AVERAGE_STRIKE_PUT = "AverageStrikePut"

    @property
    def is_average_price(self) -> bool:
        return self in (PayoffKind.AVERAGE_PRICE_CALL, PayoffKind.AVERAGE_PRICE_PUT)

    @classmethod
    def parse(cls, text: str) -> "PayoffKind":
        key = text.replace("-", "").replace("_", "").lower()
        for kind in cls:
            if kind.value.lower() == key:
                return kind
        raise ValueError(f"unknown payoff kind {text!r}")


@dataclass(frozen=True)
class ContractSpec:
    """Spot contract data.

    The geometric average runs over [0, maturity]:
    S_hat = exp((1/T) integral of log S_t dt) with S_t = exp((r-q) t + X_t)
    and X_0 = log(spot).  ``strike`` is ignored for average-strike payoffs.
    """

    spot: float
    initial_var: float
    rate: float
    dividend_yield: float
    strike: float
    maturity: float
    payoff: PayoffKind

    def __post_init__(self):
        if self.spot <= 0:
            raise ValueError("spot must be > 0")
        if self.initial_var <= 0:
            raise ValueError("initial_var must be > 0")
        if self.maturity <= 0:
            raise ValueError("maturity must be > 0")
        if self.payoff.is_average_price and self.strike <= 0:
            raise ValueError("strike must be > 0 for average-price payoffs")

    @property
    def log_spot(self) -> float:
        return math.log(self.spot)
