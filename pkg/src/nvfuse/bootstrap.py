"""Joint non-parametric bootstrap of a target statistic and auxiliary statistics.

Replicate ``b`` draws its row indices from its own Philox stream: the key is
derived from the seed and the counter's high words hold ``(attempt, b)``.
The resampled indices therefore depend only on ``(seed, b, attempt)``, not on
evaluation order or on how many threads evaluate the statistics.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import kernels
from .data import Dataset, ValidationError
from .stats import StatisticDescriptor

log = logging.getLogger(__name__)

MAX_RETRIES = 100
_U64 = 2**64


class BootstrapError(ArithmeticError):
    pass


@dataclass(frozen=True)
class BootstrapSettings:
    nboots: int = 5000
    seed: int = 0

    def __post_init__(self):
        if int(self.nboots) != self.nboots or self.nboots < 2:
            raise ValidationError(f"nboots must be an integer >= 2, got {self.nboots}")
        if int(self.seed) != self.seed or not 0 <= self.seed < _U64:
            raise ValidationError(f"seed must be an unsigned 64-bit integer, got {self.seed}")
        object.__setattr__(self, "nboots", int(self.nboots))
        object.__setattr__(self, "seed", int(self.seed))


@dataclass(frozen=True, eq=False)
class BootstrapCov:
    var_theta: float
    cov_theta_eta: np.ndarray   # (m,)
    cov_eta: np.ndarray         # (m, m)
    replicates: np.ndarray = field(repr=False)  # (nboots, 1 + m), target first
    retries: int = 0

    @property
    def joint(self) -> np.ndarray:
        m = self.cov_theta_eta.size
        out = np.empty((m + 1, m + 1))
        out[0, 0] = self.var_theta
        out[0, 1:] = out[1:, 0] = self.cov_theta_eta
        out[1:, 1:] = self.cov_eta
        return out

    def same_as(self, other: "BootstrapCov") -> bool:
        """Bit-for-bit equality of every estimated quantity."""
        return (self.var_theta == other.var_theta
                and np.array_equal(self.cov_theta_eta, other.cov_theta_eta)
                and np.array_equal(self.cov_eta, other.cov_eta)
                and np.array_equal(self.replicates, other.replicates))


def _stream_key(seed: int) -> np.ndarray:
    return np.random.SeedSequence(seed).generate_state(2, np.uint64)


def replicate_generator(seed: int, b: int, attempt: int = 0) -> np.random.Generator:
    key = _stream_key(seed)
    counter = np.array([0, 0, attempt, b], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key, counter=counter))


def draw_indices(seed: int, nboots: int, n: int, attempt: int = 0) -> np.ndarray:
    """(nboots, n) row indices, i.i.d. uniform with replacement per replicate."""
    key = _stream_key(seed)
    out = np.empty((nboots, n), dtype=np.int64)
    counter = np.zeros(4, dtype=np.uint64)
    counter[2] = attempt
    for b in range(nboots):
        counter[3] = b
        g = np.random.Generator(np.random.Philox(key=key, counter=counter))
        out[b] = g.integers(0, n, size=n)
    return out


def _encode(descriptors: Sequence[StatisticDescriptor], d: Dataset):
    kinds = np.array([s.kind.code for s in descriptors], dtype=np.int64)
    cols = np.array([d.column_index(s.column) for s in descriptors], dtype=np.int64)
    levels = np.array([s.level if s.level is not None else 0.0 for s in descriptors])
    zs = np.array([s.z() for s in descriptors])
    return kinds, cols, levels, zs


def _covariance(x: np.ndarray) -> np.ndarray:
    # einsum keeps the reduction single-threaded and order-fixed
    dev = x - x.mean(axis=0)
    cov = np.einsum("bi,bj->ij", dev, dev) / (x.shape[0] - 1)
    return 0.5 * (cov + cov.T)


def bootstrap_replicates(d: Dataset, descriptors: Sequence[StatisticDescriptor],
                         settings: BootstrapSettings) -> tuple[np.ndarray, int]:
    """Statistic values on every resample, shape (nboots, len(descriptors))."""
    n = d.n_rows
    data = d.matrix()
    enc = _encode(descriptors, d)
    idx = draw_indices(settings.seed, settings.nboots, n)
    vals = kernels.bootstrap_stats(data, idx, *enc)
    retries = 0
    for b in np.flatnonzero(~np.isfinite(vals).all(axis=1)):
        for attempt in range(1, MAX_RETRIES + 1):
            retries += 1
            row_idx = replicate_generator(settings.seed, int(b), attempt).integers(0, n, size=n)
            row = kernels.bootstrap_stats(data, row_idx[None, :], *enc)[0]
            if np.isfinite(row).all():
                vals[b] = row
                break
        else:
            raise BootstrapError(
                f"replicate {b}: statistics undefined on {MAX_RETRIES} consecutive resamples "
                "(is a NormalQuantile column nearly constant?)"
            )
    if retries:
        log.debug("bootstrap needed %d retried resamples", retries)
    return vals, retries


def bootstrap_joint(d: Dataset, target: StatisticDescriptor,
                    sources: Sequence[StatisticDescriptor],
                    settings: BootstrapSettings = BootstrapSettings()) -> BootstrapCov:
    if not sources:
        raise ValidationError("at least one auxiliary statistic is required")
    vals, retries = bootstrap_replicates(d, [target, *sources], settings)
    cov = _covariance(vals)
    return BootstrapCov(
        var_theta=float(cov[0, 0]),
        cov_theta_eta=cov[0, 1:].copy(),
        cov_eta=cov[1:, 1:].copy(),
        replicates=vals,
        retries=retries,
    )
