import numpy as np
import pytest

from nvfuse.bootstrap import (BootstrapError, BootstrapSettings, bootstrap_joint,
                              bootstrap_replicates, draw_indices)
from nvfuse.data import Dataset, ValidationError
from nvfuse.stats import StatisticDescriptor as S, sample_variance


def test_settings_validation():
    with pytest.raises(ValidationError):
        BootstrapSettings(nboots=1)
    with pytest.raises(ValidationError):
        BootstrapSettings(seed=-1)
    with pytest.raises(ValidationError):
        BootstrapSettings(seed=2**64)
    assert BootstrapSettings().nboots == 5000


def test_indices_depend_only_on_seed_and_replicate():
    full = draw_indices(7, 50, 36)
    assert full.min() >= 0 and full.max() < 36
    # replicate b's stream does not depend on how many replicates are drawn
    assert np.array_equal(draw_indices(7, 10, 36), full[:10])
    assert not np.array_equal(draw_indices(8, 10, 36), full[:10])


def test_constant_target_has_zero_variance():
    d = Dataset({"c": np.full(20, 5.0), "x": np.arange(20.0)})
    res = bootstrap_joint(d, S.mean("c"), [S.mean("x")], BootstrapSettings(200, 1))
    assert res.var_theta == 0.0
    assert res.cov_theta_eta[0] == 0.0


def test_mean_variance_matches_closed_form(sales):
    s2 = sample_variance(sales["B"])
    assert s2 == pytest.approx(1912.8, abs=1e-9)
    res = bootstrap_joint(sales, S.mean("B"), [S.median("B")], BootstrapSettings(10000, 2024))
    assert res.var_theta == pytest.approx(s2 / 36, rel=0.10)


def test_median_variance_near_reference(sales):
    res = bootstrap_joint(sales, S.median("B"), [S.mean("B")], BootstrapSettings(10000, 123))
    assert res.var_theta * 36 == pytest.approx(3227.319, rel=0.15)


def test_bit_identical_reruns(sales):
    st = BootstrapSettings(1000, 42)
    args = (sales, S.normal_quantile("A", 0.2326), [S.mean("B"), S.median("B")], st)
    assert bootstrap_joint(*args).same_as(bootstrap_joint(*args))


def test_self_source_covariance_equals_variance(sales):
    target = S.normal_quantile("A", 0.2326)
    res = bootstrap_joint(sales, target, [target], BootstrapSettings(500, 3))
    assert res.cov_theta_eta[0] == res.var_theta
    assert res.cov_eta[0, 0] == res.var_theta


def test_mean_mean_correlation_is_one(sales):
    res = bootstrap_joint(sales, S.mean("B"), [S.mean("B")], BootstrapSettings(500, 3))
    corr = res.cov_theta_eta[0] / np.sqrt(res.var_theta * res.cov_eta[0, 0])
    assert abs(corr - 1.0) <= 1e-10


def test_joint_covariance_is_psd(sales):
    res = bootstrap_joint(sales, S.normal_quantile("A", 0.2326),
                          [S.mean("B"), S.median("B"), S.empirical_quantile("A", 0.3)],
                          BootstrapSettings(800, 9))
    j = res.joint
    assert np.array_equal(j, j.T)
    assert np.all(np.diag(res.cov_eta) >= 0)
    assert np.linalg.eigvalsh(j).min() >= -1e-8 * np.abs(j).max()


def test_seed_to_seed_noise_is_small(sales):
    args = (sales, S.normal_quantile("A", 0.2326), [S.mean("B")])
    v1 = bootstrap_joint(*args, BootstrapSettings(5000, 1)).var_theta
    v2 = bootstrap_joint(*args, BootstrapSettings(5000, 2)).var_theta
    assert abs(v1 - v2) / max(v1, v2) <= 0.10


def test_degenerate_resamples_are_retried():
    # P(all three rows equal 1.0) is substantial, so some replicates need a retry
    d = Dataset({"x": [1.0, 1.0, 2.0], "y": [0.0, 1.0, 2.0]})
    vals, retries = bootstrap_replicates(d, [S.normal_quantile("x", 0.4), S.mean("y")],
                                         BootstrapSettings(200, 5))
    assert retries > 0
    assert np.isfinite(vals).all()
    vals2, retries2 = bootstrap_replicates(d, [S.normal_quantile("x", 0.4), S.mean("y")],
                                           BootstrapSettings(200, 5))
    assert retries2 == retries and np.array_equal(vals, vals2)


def test_always_degenerate_aborts():
    d = Dataset({"x": [1.0, 1.0, 1.0], "y": [0.0, 1.0, 2.0]})
    with pytest.raises(BootstrapError, match="100 consecutive"):
        bootstrap_joint(d, S.normal_quantile("x", 0.4), [S.mean("y")], BootstrapSettings(10, 0))


def test_requires_sources(sales):
    with pytest.raises(ValidationError):
        bootstrap_joint(sales, S.mean("A"), [], BootstrapSettings(10, 0))
