"""Classic single-period newsvendor: fractile, order quantity, expected profit.

Salvage value and shortage penalty are zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .data import Dataset, ValidationError
from .stats import (Kind, StatisticDescriptor, eval_statistic, normal_cdf,
                    normal_inverse_cdf, normal_pdf)


@dataclass(frozen=True)
class NewsvendorInstance:
    unit_price: float
    unit_cost: float
    demand_column: str

    def __post_init__(self):
        critical_fractile(self.unit_price, self.unit_cost)

    @property
    def fractile(self) -> float:
        return critical_fractile(self.unit_price, self.unit_cost)


def critical_fractile(price: float, cost: float) -> float:
    if not price > 0:
        raise ValidationError(f"price must be positive, got {price}")
    if cost < 0:
        raise ValidationError(f"cost must be non-negative, got {cost}")
    if cost > price:
        raise ValidationError(f"cost {cost} exceeds price {price}")
    return (price - cost) / price


def quantile_descriptor(inst: NewsvendorInstance, model: str | Kind,
                        fractile_decimals: int | None = 4) -> StatisticDescriptor:
    """The quantile statistic solving the instance.

    The fractile is rounded to ``fractile_decimals`` places (as it is usually
    quoted, e.g. 23.26%) before use; pass ``None`` to use it exactly.
    """
    kind = _MODELS.get(model, model)
    try:
        kind = Kind(kind)
    except ValueError:
        raise ValidationError(f"unknown demand model {model!r}; use 'normal' or 'empirical'") from None
    if not kind.is_quantile:
        raise ValidationError(f"demand model must be a quantile kind, got {kind.value}")
    level = inst.fractile
    if fractile_decimals is not None:
        level = round(level, fractile_decimals)
    if not 0.0 < level < 1.0:
        raise ValidationError(f"critical fractile {level} leaves no room to order (need 0 < fractile < 1)")
    return StatisticDescriptor(kind, inst.demand_column, level)


_MODELS = {"normal": Kind.NORMAL_QUANTILE, "empirical": Kind.EMPIRICAL_QUANTILE}


def order_quantity(d: Dataset, inst: NewsvendorInstance, model: str | Kind = "normal",
                   fractile_decimals: int | None = 4) -> float:
    return eval_statistic(quantile_descriptor(inst, model, fractile_decimals), d)


def expected_sales(q: float, mu: float, sigma: float) -> float:
    """E[min(D, q)] for D ~ Normal(mu, sigma^2)."""
    if not sigma > 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    z = (q - mu) / sigma
    return q - (q - mu) * normal_cdf(z) - sigma * normal_pdf(z)


def expected_profit(inst: NewsvendorInstance, q: float, mu: float, sigma: float) -> float:
    return inst.unit_price * expected_sales(q, mu, sigma) - inst.unit_cost * q


def normal_optimum(inst: NewsvendorInstance, mu: float, sigma: float) -> float:
    if inst.fractile <= 0.0:
        return -math.inf
    return mu + sigma * normal_inverse_cdf(inst.fractile)
