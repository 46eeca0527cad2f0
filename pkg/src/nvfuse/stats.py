"""Scalar statistics evaluated on a Dataset, plus the normal-family helpers."""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from . import _accel, kernels
from .data import Dataset, ValidationError


class StatisticError(ArithmeticError):
    """A statistic is undefined on the given data (e.g. zero variance)."""


class Kind(str, Enum):
    MEAN = "mean"
    MEDIAN = "median"
    EMPIRICAL_QUANTILE = "empirical_quantile"
    NORMAL_QUANTILE = "normal_quantile"

    @property
    def code(self) -> int:
        return _KIND_CODES[self]

    @property
    def is_quantile(self) -> bool:
        return self in (Kind.EMPIRICAL_QUANTILE, Kind.NORMAL_QUANTILE)


_KIND_CODES = {
    Kind.MEAN: kernels.MEAN,
    Kind.MEDIAN: kernels.MEDIAN,
    Kind.EMPIRICAL_QUANTILE: kernels.EMPIRICAL_QUANTILE,
    Kind.NORMAL_QUANTILE: kernels.NORMAL_QUANTILE,
}


@dataclass(frozen=True)
class StatisticDescriptor:
    kind: Kind
    column: str
    level: float | None = None

    def __post_init__(self):
        try:
            object.__setattr__(self, "kind", Kind(self.kind))
        except ValueError:
            raise ValidationError(
                f"unknown statistic kind {self.kind!r}; expected one of {[k.value for k in Kind]}"
            ) from None
        if not isinstance(self.column, str) or not self.column:
            raise ValidationError("statistic column must be a non-empty string")
        if self.kind.is_quantile:
            if self.level is None:
                raise ValidationError(f"{self.kind.value} requires a level")
            level = float(self.level)
            if not 0.0 < level < 1.0:
                raise ValidationError(f"level must lie in (0, 1), got {level}")
            object.__setattr__(self, "level", level)
        elif self.level is not None:
            raise ValidationError(f"{self.kind.value} takes no level")

    @classmethod
    def mean(cls, column):
        return cls(Kind.MEAN, column)

    @classmethod
    def median(cls, column):
        return cls(Kind.MEDIAN, column)

    @classmethod
    def empirical_quantile(cls, column, level):
        return cls(Kind.EMPIRICAL_QUANTILE, column, level)

    @classmethod
    def normal_quantile(cls, column, level):
        return cls(Kind.NORMAL_QUANTILE, column, level)

    def to_json(self) -> dict:
        out = {"kind": self.kind.value, "column": self.column}
        if self.level is not None:
            out["level"] = self.level
        return out

    @classmethod
    def from_json(cls, obj) -> "StatisticDescriptor":
        if not isinstance(obj, dict):
            raise ValidationError("statistic must be a JSON object")
        extra = set(obj) - {"kind", "column", "level"}
        if extra:
            raise ValidationError(f"unexpected statistic fields {sorted(extra)}")
        for key in ("kind", "column"):
            if key not in obj:
                raise ValidationError(f"statistic is missing {key!r}")
        return cls(obj["kind"], obj["column"], obj.get("level"))

    def z(self) -> float:
        """Standard normal quantile used by NormalQuantile (0 otherwise)."""
        return normal_inverse_cdf(self.level) if self.kind is Kind.NORMAL_QUANTILE else 0.0


# --- normal family ---------------------------------------------------------

_SQRT2 = math.sqrt(2.0)
_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)
_ppnd = kernels.ppnd16 if _accel.USE_NUMBA else getattr(kernels.ppnd16, "py_func", kernels.ppnd16)


def normal_inverse_cdf(p: float) -> float:
    p = float(p)
    if not 0.0 < p < 1.0:
        raise ValueError(f"probability must lie in (0, 1), got {p}")
    return float(_ppnd(p))


def normal_cdf(x: float) -> float:
    return 0.5 * math.erfc(-x / _SQRT2)


def normal_pdf(x: float) -> float:
    return _INV_SQRT_2PI * math.exp(-0.5 * x * x)


# --- sample statistics -----------------------------------------------------

def sample_mean(x) -> float:
    x = np.asarray(x, dtype=np.float64)
    # sequential sum, matching the bootstrap kernels bit for bit
    return float(np.cumsum(x)[-1] / x.size)


def sample_variance(x) -> float:
    """Unbiased (n - 1 divisor) sample variance."""
    x = np.asarray(x, dtype=np.float64)
    if x.size < 2:
        raise StatisticError("sample variance needs at least 2 observations")
    dev = x - sample_mean(x)
    return float(np.cumsum(dev * dev)[-1] / (x.size - 1))


def empirical_quantile(x, level: float) -> float:
    """Order-statistic interpolation at 1-based rank (n - 1) * level + 1."""
    if not 0.0 < level < 1.0:
        raise ValueError(f"level must lie in (0, 1), got {level}")
    xs = np.sort(np.asarray(x, dtype=np.float64))
    return float(kernels.interp_sorted_rows(xs[None, :], level)[0])


def sample_median(x) -> float:
    return empirical_quantile(x, 0.5)


def eval_statistic(s: StatisticDescriptor, d: Dataset) -> float:
    x = d[s.column]
    if d.n_rows < 2:
        raise StatisticError("statistics need at least 2 rows")
    if s.kind is Kind.MEAN:
        return sample_mean(x)
    if s.kind is Kind.MEDIAN:
        return sample_median(x)
    if s.kind is Kind.EMPIRICAL_QUANTILE:
        return empirical_quantile(x, s.level)
    var = sample_variance(x)
    if var <= 0.0:
        raise StatisticError(f"column {s.column!r} has zero variance; normal quantile undefined")
    return sample_mean(x) + math.sqrt(var) * s.z()


def correlation_matrix(d: Dataset) -> np.ndarray:
    """Pearson correlations; a constant column correlates 1 with itself, 0 elsewhere."""
    m = d.matrix()
    dev = m - m.mean(axis=0)
    ss = np.sqrt((dev * dev).sum(axis=0))
    k = m.shape[1]
    out = np.eye(k)
    for i in range(k):
        for j in range(i + 1, k):
            if ss[i] > 0 and ss[j] > 0:
                out[i, j] = out[j, i] = float(dev[:, i] @ dev[:, j]) / (ss[i] * ss[j])
            else:
                out[i, j] = out[j, i] = 0.0
    return out
