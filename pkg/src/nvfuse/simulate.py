"""Monte Carlo harness: synthetic correlated demand, repeated estimation, and
empirical bias / variance / MSE of the competing estimators.
"""

from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .bootstrap import BootstrapSettings, bootstrap_joint
from .combine import COV_SCALINGS, AdditionalSource, Method, Problem, estimate
from .data import Dataset, ValidationError
from .stats import Kind, StatisticDescriptor, normal_inverse_cdf

ESTIMATORS = ("theta_hat", "mvar", "mmse", "known_bias")


@dataclass(frozen=True)
class SourceSpec:
    """An auxiliary statistic on column B and how its report is corrupted."""

    kind: str = "mean"
    bias: float = 0.0
    reported_variance: float = 0.0
    biased: bool = False
    level: float | None = None

    def statistic(self) -> StatisticDescriptor:
        return StatisticDescriptor(self.kind, "B", self.level)

    def true_value(self, mu: float, sigma: float) -> float:
        kind = self.statistic().kind
        if kind in (Kind.MEAN, Kind.MEDIAN):
            return mu
        return mu + sigma * normal_inverse_cdf(self.level)


@dataclass(frozen=True)
class Scenario:
    n: int = 200
    mu_a: float = 4000.0
    mu_b: float = 130.0
    sigma_a: float = 1300.0
    sigma_b: float = 45.0
    rho: float = 0.9
    fractile_level: float = 0.2326
    sources: tuple[SourceSpec, ...] = (SourceSpec(),)
    replications: int = 1000
    base_seed: int = 0
    nboots: int = 200
    eig_cutoff: float = 1.0
    cov_scaling: str = "none"
    external_noise: bool = True

    def __post_init__(self):
        object.__setattr__(self, "sources", tuple(
            s if isinstance(s, SourceSpec) else SourceSpec(**s) for s in self.sources))
        if not self.sources:
            raise ValidationError("scenario needs at least one source")
        if not abs(self.rho) < 1:
            raise ValidationError(f"rho must satisfy |rho| < 1, got {self.rho}")
        if not (self.sigma_a > 0 and self.sigma_b > 0):
            raise ValidationError("sigma_a and sigma_b must be positive")
        if self.replications < 100:
            raise ValidationError(f"replications must be >= 100, got {self.replications}")
        if self.n < 2:
            raise ValidationError(f"n must be >= 2, got {self.n}")
        if not 0 < self.fractile_level < 1:
            raise ValidationError("fractile_level must lie in (0, 1)")
        if self.cov_scaling not in COV_SCALINGS:
            raise ValidationError(f"cov_scaling must be one of {COV_SCALINGS}")
        BootstrapSettings(self.nboots, self.base_seed)
        for s in self.sources:
            s.statistic()
            if s.reported_variance < 0:
                raise ValidationError("reported_variance must be >= 0")

    @property
    def theta_true(self) -> float:
        return self.mu_a + self.sigma_a * normal_inverse_cdf(self.fractile_level)

    @property
    def target(self) -> StatisticDescriptor:
        return StatisticDescriptor.normal_quantile("A", self.fractile_level)

    def to_json(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_json(cls, obj) -> "Scenario":
        if not isinstance(obj, dict):
            raise ValidationError("scenario must be a JSON object")
        names = {f.name for f in dataclasses.fields(cls)}
        extra = set(obj) - names
        if extra:
            raise ValidationError(f"unknown scenario fields {sorted(extra)}")
        obj = dict(obj)
        if "sources" in obj:
            if not isinstance(obj["sources"], list):
                raise ValidationError("sources must be a list")
            try:
                obj["sources"] = tuple(SourceSpec(**s) for s in obj["sources"])
            except TypeError as exc:
                raise ValidationError(f"bad source entry: {exc}") from None
        return cls(**obj)

    @classmethod
    def load(cls, path) -> "Scenario":
        with open(path) as fh:
            return cls.from_json(json.load(fh))


@dataclass(frozen=True)
class EstimatorMetrics:
    mean: float
    bias: float
    variance: float
    mse: float
    mean_reported_var: float

    @classmethod
    def from_samples(cls, est: np.ndarray, reported_var: np.ndarray, truth: float):
        mean = float(est.mean())
        err = est - truth
        return cls(mean, mean - truth, float(est.var()), float(np.mean(err * err)),
                   float(reported_var.mean()))


@dataclass(frozen=True)
class ScenarioMetrics:
    theta_true: float
    replications: int
    estimators: dict[str, EstimatorMetrics]

    def mse_ratio(self, num: str, den: str = "theta_hat") -> float:
        return self.estimators[num].mse / self.estimators[den].mse

    def to_json(self) -> dict:
        return {
            "theta_true": self.theta_true,
            "replications": self.replications,
            "estimators": {k: dataclasses.asdict(v) for k, v in self.estimators.items()},
            "mse_ratio_mvar": self.mse_ratio("mvar"),
            "mse_ratio_mmse": self.mse_ratio("mmse"),
        }

    def to_table(self) -> str:
        cols = ("mean", "bias", "variance", "mse", "mean_reported_var")
        rows = [("estimator", *cols)]
        for name, m in self.estimators.items():
            rows.append((name, *(f"{getattr(m, c):.6g}" for c in cols)))
        widths = [max(len(r[i]) for r in rows) for i in range(len(cols) + 1)]
        lines = ["  ".join(cell.rjust(w) if i else cell.ljust(w) for i, (cell, w) in enumerate(zip(r, widths)))
                 for r in rows]
        lines.append(f"theta_true = {self.theta_true:.6g}, R = {self.replications}, "
                     f"MSE ratio mvar/theta_hat = {self.mse_ratio('mvar'):.4f}, "
                     f"mmse/theta_hat = {self.mse_ratio('mmse'):.4f}")
        return "\n".join(lines)


def bivariate_normal(rng: np.random.Generator, n: int, mu_a: float, mu_b: float,
                     sigma_a: float, sigma_b: float, rho: float) -> np.ndarray:
    """(n, 2) draws via the Cholesky factor of the 2x2 correlation matrix."""
    z = rng.standard_normal((n, 2))
    a = z[:, 0]
    b = rho * z[:, 0] + math.sqrt(1.0 - rho * rho) * z[:, 1]
    return np.column_stack([mu_a + sigma_a * a, mu_b + sigma_b * b])


def replicate_rng(base_seed: int, r: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(base_seed, spawn_key=(r,)))


def run_replication(s: Scenario, r: int) -> dict[str, tuple[float, float]]:
    """One synthetic dataset -> {estimator: (estimate, reported variance)}."""
    rng = replicate_rng(s.base_seed, r)
    xy = bivariate_normal(rng, s.n, s.mu_a, s.mu_b, s.sigma_a, s.sigma_b, s.rho)
    d = Dataset({"A": xy[:, 0], "B": xy[:, 1]})
    sources = []
    for spec in s.sources:
        reported = spec.true_value(s.mu_b, s.sigma_b) + spec.bias
        if s.external_noise and spec.reported_variance > 0:
            reported += math.sqrt(spec.reported_variance) * rng.standard_normal()
        sources.append(AdditionalSource(spec.statistic(), reported, spec.reported_variance, spec.biased))
    problem = Problem(s.target, sources)
    settings = BootstrapSettings(s.nboots, int(rng.integers(0, 2**63)))
    boot = bootstrap_joint(d, problem.target, [src.statistic for src in sources], settings)
    kw = dict(cov_scaling=s.cov_scaling, boot=boot)
    mv = estimate(d, problem, settings, s.eig_cutoff, Method.MVAR, **kw)
    ms = estimate(d, problem, settings, s.eig_cutoff, Method.MMSE, **kw)
    kb = estimate(d, problem, settings, s.eig_cutoff, Method.MMSE,
                  fixed_delta=[spec.bias for spec in s.sources], **kw)
    return {
        "theta_hat": (mv.theta_hat, mv.theta_hat_var),
        "mvar": (mv.theta_est, mv.theta_est_var),
        "mmse": (ms.theta_est, ms.theta_est_var),
        "known_bias": (kb.theta_est, kb.theta_est_var),
    }


def _collect(s: Scenario) -> tuple[np.ndarray, np.ndarray]:
    est = np.empty((s.replications, len(ESTIMATORS)))
    var = np.empty_like(est)
    # fixed reduction order: replicate r fills row r
    for r in range(s.replications):
        out = run_replication(s, r)
        for j, name in enumerate(ESTIMATORS):
            est[r, j], var[r, j] = out[name]
    return est, var


def run_scenario(s: Scenario) -> ScenarioMetrics:
    est, var = _collect(s)
    truth = s.theta_true
    return ScenarioMetrics(truth, s.replications, {
        name: EstimatorMetrics.from_samples(est[:, j], var[:, j], truth)
        for j, name in enumerate(ESTIMATORS)
    })


@dataclass(frozen=True)
class SweepRow:
    n: int
    scaled_mmse_gap: float   # median sqrt(n) |mmse - theta_hat| under the scenario's biases
    n_var_theta_hat: float   # n * var, all biases set to zero from here on
    n_var_mvar: float
    n_var_mmse: float


@dataclass(frozen=True)
class SweepResult:
    rows: list[SweepRow] = field(default_factory=list)

    def to_json(self) -> list[dict]:
        return [dataclasses.asdict(r) for r in self.rows]

    def to_table(self) -> str:
        head = ("n", "scaled_mmse_gap", "n_var_theta_hat", "n_var_mvar", "n_var_mmse")
        body = [[str(r.n)] + [f"{getattr(r, h):.6g}" for h in head[1:]] for r in self.rows]
        widths = [max(len(x) for x in col) for col in zip(head, *body)]
        return "\n".join("  ".join(c.rjust(w) for c, w in zip(row, widths)) for row in [head, *body])


def convergence_sweep(s: Scenario, n_grid) -> SweepResult:
    n_grid = [int(n) for n in n_grid]
    if len(n_grid) < 3 or any(b <= a for a, b in zip(n_grid, n_grid[1:])):
        raise ValidationError("n_grid must be strictly increasing with at least 3 entries")
    j_hat, j_mvar, j_mmse = (ESTIMATORS.index(k) for k in ("theta_hat", "mvar", "mmse"))
    unbiased = tuple(dataclasses.replace(src, bias=0.0) for src in s.sources)
    rows = []
    for n in n_grid:
        est, _ = _collect(dataclasses.replace(s, n=n))
        gap = float(np.median(np.abs(est[:, j_mmse] - est[:, j_hat])) * math.sqrt(n))
        est0, _ = _collect(dataclasses.replace(s, n=n, sources=unbiased))
        rows.append(SweepRow(n, gap, n * float(est0[:, j_hat].var()),
                             n * float(est0[:, j_mvar].var()), n * float(est0[:, j_mmse].var())))
    return SweepResult(rows)
