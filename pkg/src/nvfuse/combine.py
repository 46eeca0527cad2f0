"""Minimum-variance (MVAR) and minimum-MSE (MMSE) fusion of an empirical
estimate with externally reported statistics.

Both estimators live in the linear class ``theta_hat + lambda . delta_hat`` with
``delta_hat = eta_hat - eta_tilde``. The optimal weights are
``lambda = -c V^-`` where ``c = cov(theta_hat, eta_hat)`` and

* MVAR: ``V = cov(eta_hat) + diag(reported variances)``
* MMSE: ``V`` as above plus ``d d^T``, ``d`` being ``delta_hat`` restricted to
  sources flagged as possibly biased.

``cov_scaling`` controls how the empirical (bootstrap) block is put on the
scale of the reported variances. ``"n-1"`` (default) divides the bootstrap
covariances and the plug-in bias term by ``n - 1``; the bundled estimate
fixtures and their reference values use this convention.
``"none"`` uses the bootstrap covariances as they are.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence

import numpy as np

from .bootstrap import BootstrapCov, BootstrapSettings, bootstrap_joint
from .data import Dataset, ValidationError
from .linalg import pseudo_inverse_decomposition
from .stats import StatisticDescriptor, eval_statistic

COV_SCALINGS = ("n-1", "none")


class Method(str, Enum):
    MVAR = "mvar"
    MMSE = "mmse"


@dataclass(frozen=True)
class AdditionalSource:
    statistic: StatisticDescriptor
    reported_value: float
    reported_variance: float
    biased: bool = False

    def __post_init__(self):
        for name in ("reported_value", "reported_variance"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
                raise ValidationError(f"{name} must be a finite number, got {value!r}")
            object.__setattr__(self, name, float(value))
        if self.reported_variance < 0:
            raise ValidationError(f"reported_variance must be >= 0, got {self.reported_variance}")
        if not isinstance(self.biased, (bool, int)) or self.biased not in (0, 1):
            raise ValidationError(f"biased must be a boolean or 0/1, got {self.biased!r}")
        object.__setattr__(self, "biased", bool(self.biased))

    def to_json(self) -> dict:
        return {
            "statistic": self.statistic.to_json(),
            "reported_value": self.reported_value,
            "reported_variance": self.reported_variance,
            "biased": self.biased,
        }

    @classmethod
    def from_json(cls, obj) -> "AdditionalSource":
        if not isinstance(obj, dict):
            raise ValidationError("source must be a JSON object")
        for key in ("statistic", "reported_value", "reported_variance"):
            if key not in obj:
                raise ValidationError(f"source is missing {key!r}")
        extra = set(obj) - {"statistic", "reported_value", "reported_variance", "biased"}
        if extra:
            raise ValidationError(f"unexpected source fields {sorted(extra)}")
        return cls(StatisticDescriptor.from_json(obj["statistic"]),
                   obj["reported_value"], obj["reported_variance"], obj.get("biased", False))


@dataclass(frozen=True)
class Problem:
    target: StatisticDescriptor
    sources: tuple[AdditionalSource, ...]

    def __post_init__(self):
        object.__setattr__(self, "sources", tuple(self.sources))
        if not self.sources:
            raise ValidationError("at least one additional source required")
        seen = set()
        for s in self.sources:
            key = (s.statistic, s.reported_value)
            if key in seen:
                raise ValidationError(f"duplicate source {s.statistic.to_json()} = {s.reported_value}")
            seen.add(key)

    @property
    def m(self) -> int:
        return len(self.sources)

    def check(self, d: Dataset) -> None:
        for s in (self.target, *(src.statistic for src in self.sources)):
            d[s.column]


@dataclass(frozen=True)
class CombinedEstimate:
    theta_est: float
    theta_est_var: float
    theta_hat: float
    theta_hat_var: float
    delta_hat: tuple[float, ...]
    correction: float
    retained_eigs: int
    method: Method
    eta_hat: tuple[float, ...] = ()
    weights: tuple[float, ...] = ()
    relevance: float = 0.0
    variance_clamped: bool = False
    eigenvalues: tuple[float, ...] = field(default=(), repr=False)


def combine_with_lambda(theta_hat: float, lam: Sequence[float], delta_hat: Sequence[float]) -> float:
    lam = np.asarray(lam, dtype=np.float64).ravel()
    delta_hat = np.asarray(delta_hat, dtype=np.float64).ravel()
    if lam.shape != delta_hat.shape:
        raise ValueError(f"lambda has length {lam.size}, delta_hat has length {delta_hat.size}")
    return float(theta_hat + lam @ delta_hat)


def relevance_form(c: Sequence[float], v_inv) -> float:
    """``c . v_inv . c``: the variance the auxiliary statistics can remove."""
    c = np.asarray(c, dtype=np.float64).ravel()
    v_inv = np.atleast_2d(np.asarray(v_inv, dtype=np.float64))
    if v_inv.shape != (c.size, c.size):
        raise ValueError(f"c has length {c.size} but v_inv has shape {v_inv.shape}")
    return max(0.0, float(c @ v_inv @ c))


def _divisor(cov_scaling: str, n: int) -> float:
    if cov_scaling == "n-1":
        return float(n - 1)
    if cov_scaling == "none":
        return 1.0
    raise ValidationError(f"cov_scaling must be one of {COV_SCALINGS}, got {cov_scaling!r}")


def fuse(theta_hat: float, var_theta: float, c, cov_eta, reported_variances, delta_hat,
         penalty=None, eig_cutoff: float = 1.0, method: Method = Method.MVAR,
         eta_hat=()) -> CombinedEstimate:
    """Combine already-scaled moments into an estimate.

    ``penalty`` is the vector whose outer product is added to ``V`` (zeros or
    ``None`` for MVAR).
    """
    c = np.asarray(c, dtype=np.float64).ravel()
    delta_hat = np.asarray(delta_hat, dtype=np.float64).ravel()
    v = np.atleast_2d(np.asarray(cov_eta, dtype=np.float64)) + np.diag(
        np.asarray(reported_variances, dtype=np.float64))
    if penalty is not None:
        pen = np.asarray(penalty, dtype=np.float64).ravel()
        v = v + np.outer(pen, pen)
    v_inv, dec = pseudo_inverse_decomposition(v, eig_cutoff)
    weights = -(c @ v_inv)
    theta_est = theta_hat if not delta_hat.any() else combine_with_lambda(theta_hat, weights, delta_hat)
    m_form = relevance_form(c, v_inv)
    est_var = var_theta - m_form
    return CombinedEstimate(
        theta_est=float(theta_est),
        theta_est_var=max(0.0, est_var),
        theta_hat=float(theta_hat),
        theta_hat_var=float(var_theta),
        delta_hat=tuple(float(x) for x in delta_hat),
        correction=float(theta_hat - theta_est) if delta_hat.any() else 0.0,
        retained_eigs=dec.retained,
        method=Method(method),
        eta_hat=tuple(float(x) for x in eta_hat),
        weights=tuple(float(x) for x in weights),
        relevance=m_form,
        variance_clamped=est_var < 0.0,
        eigenvalues=tuple(float(x) for x in dec.eigenvalues),
    )


def point_estimates(d: Dataset, p: Problem) -> tuple[float, np.ndarray, np.ndarray]:
    """(theta_hat, eta_hat, delta_hat) on the empirical data."""
    p.check(d)
    theta_hat = eval_statistic(p.target, d)
    eta_hat = np.array([eval_statistic(s.statistic, d) for s in p.sources])
    eta_tilde = np.array([s.reported_value for s in p.sources])
    return theta_hat, eta_hat, eta_hat - eta_tilde


def estimate(d: Dataset, p: Problem, settings: BootstrapSettings = BootstrapSettings(),
             eig_cutoff: float = 1.0, method: Method | str = Method.MVAR, *,
             cov_scaling: str = "n-1", boot: BootstrapCov | None = None,
             fixed_delta: Sequence[float] | None = None) -> CombinedEstimate:
    """Shared driver behind :func:`mvar` and :func:`mmse`.

    ``boot`` lets callers reuse one bootstrap for several estimators.
    ``fixed_delta`` replaces the plug-in bias with a known bias vector
    (used by the simulation harness to study the impact of bias).
    """
    method = Method(method)
    div = _divisor(cov_scaling, d.n_rows)
    theta_hat, eta_hat, delta_hat = point_estimates(d, p)
    if boot is None:
        boot = bootstrap_joint(d, p.target, [s.statistic for s in p.sources], settings)
    elif boot.cov_theta_eta.size != p.m:
        raise ValidationError("bootstrap result does not match the problem's sources")
    reported = np.array([s.reported_variance for s in p.sources])

    penalty = None
    if fixed_delta is not None:
        penalty = np.asarray(fixed_delta, dtype=np.float64).ravel()
        if penalty.size != p.m:
            raise ValidationError(f"fixed_delta must have length {p.m}")
        penalty = penalty / math.sqrt(div)
    elif method is Method.MMSE:
        mask = np.array([s.biased for s in p.sources], dtype=bool)
        if mask.any():
            penalty = np.where(mask, delta_hat, 0.0) / math.sqrt(div)

    return fuse(theta_hat, boot.var_theta / div, boot.cov_theta_eta / div, boot.cov_eta / div,
                reported, delta_hat, penalty, eig_cutoff, method, eta_hat)


def mvar(d: Dataset, p: Problem, settings: BootstrapSettings = BootstrapSettings(),
         eig_cutoff: float = 1.0, **kwargs) -> CombinedEstimate:
    """Minimum-variance estimate assuming every source is unbiased."""
    return estimate(d, p, settings, eig_cutoff, Method.MVAR, **kwargs)


def mmse(d: Dataset, p: Problem, settings: BootstrapSettings = BootstrapSettings(),
         eig_cutoff: float = 1.0, **kwargs) -> CombinedEstimate:
    """Minimum-MSE estimate; sources flagged ``biased`` are penalised by their discrepancy."""
    return estimate(d, p, settings, eig_cutoff, Method.MMSE, **kwargs)
