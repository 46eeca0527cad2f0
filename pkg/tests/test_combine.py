import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nvfuse.bootstrap import BootstrapSettings, bootstrap_joint
from nvfuse.combine import (AdditionalSource as Src, Method, Problem, combine_with_lambda, estimate,
                            mmse, mvar, point_estimates, relevance_form)
from nvfuse.data import Dataset, ValidationError
from nvfuse.stats import StatisticDescriptor as S, eval_statistic

from conftest import random_dataset

TARGET = S.normal_quantile("A", 0.2326)


def sales_problem(v1=115.3846, var1=1912.8 / 260, biased1=False):
    return Problem(TARGET, [Src(S.mean("B"), v1, var1, biased1),
                            Src(S.median("B"), 100, 3227.319 / 260, False)])


# --- linear class ----------------------------------------------------------------

def test_lambda_zero_keeps_theta_hat():
    assert combine_with_lambda(3118.14, [0, 0], [12.6154, 3.5]) == 3118.14


def test_lambda_arithmetic():
    assert combine_with_lambda(3118.14, [-1, 0], [12.6154, 3.5]) == pytest.approx(3105.5246, abs=1e-9)


@given(st.lists(st.floats(min_value=-1e6, max_value=1e6), min_size=1, max_size=5))
def test_zero_delta_keeps_theta_hat(lam):
    assert combine_with_lambda(7.5, lam, [0.0] * len(lam)) == 7.5


def test_lambda_length_mismatch():
    with pytest.raises(ValueError):
        combine_with_lambda(1.0, [1, 2], [1])


# --- relevance form ----------------------------------------------------------------

def test_relevance_zero_and_scalar():
    assert relevance_form([0.0, 0.0], np.eye(2)) == 0.0
    assert relevance_form([1.0], [[1.0]]) == 1.0
    with pytest.raises(ValueError):
        relevance_form([1.0, 2.0], np.eye(3))


def test_relevance_matches_variance_drop(sales):
    # reported Theta.Hat.Var - Theta.Est.Var = 1060.981 - 904.6197
    res = mvar(sales, sales_problem(), BootstrapSettings(5000, 123))
    assert res.relevance == pytest.approx(1060.981 - 904.6197, rel=0.35)
    assert res.theta_hat_var - res.theta_est_var == pytest.approx(res.relevance, rel=1e-12)


# --- validation -------------------------------------------------------------------

def test_problem_needs_sources():
    with pytest.raises(ValidationError, match="at least one additional source"):
        Problem(TARGET, [])


def test_duplicate_sources_rejected():
    s = Src(S.mean("B"), 1.0, 1.0)
    with pytest.raises(ValidationError, match="duplicate"):
        Problem(TARGET, [s, Src(S.mean("B"), 1.0, 2.0)])
    Problem(TARGET, [s, Src(S.mean("B"), 2.0, 1.0)])


@pytest.mark.parametrize("bad", [dict(reported_variance=-1.0), dict(reported_value=float("nan")),
                                 dict(biased=2)])
def test_source_validation(bad):
    kw = dict(statistic=S.mean("B"), reported_value=1.0, reported_variance=1.0, biased=False) | bad
    with pytest.raises(ValidationError):
        Src(**kw)


def test_source_json_round_trip():
    s = Src(S.median("B"), 100.0, 12.4, True)
    assert Src.from_json(s.to_json()) == s


def test_unknown_column_in_problem(sales):
    p = Problem(TARGET, [Src(S.mean("Z"), 1.0, 1.0)])
    with pytest.raises(ValidationError, match="unknown column"):
        mvar(sales, p, BootstrapSettings(10, 0))


# --- point estimates ------------------------------------------------------------------

def test_discrepancy_on_table_one(sales):
    theta_hat, eta_hat, delta_hat = point_estimates(sales, sales_problem())
    assert theta_hat == pytest.approx(3118.14, abs=0.01)
    assert list(eta_hat) == [128.0, 103.5]
    assert delta_hat == pytest.approx([12.6154, 3.5], abs=1e-4)


# --- invariants ---------------------------------------------------------------------

@settings(max_examples=30, deadline=None)
@given(st.integers(min_value=0, max_value=2**32 - 1), st.floats(min_value=-0.95, max_value=0.95),
       st.floats(min_value=0.0, max_value=50.0), st.sampled_from(["n-1", "none"]))
def test_mvar_variance_dominance(seed, rho, var1, scaling):
    rng = np.random.default_rng(seed)
    d = random_dataset(rng, n=30, rho=rho)
    p = Problem(TARGET, [Src(S.mean("B"), 50 + rng.normal(), var1),
                         Src(S.median("B"), 50 + rng.normal(), 1.0 + var1)])
    res = mvar(d, p, BootstrapSettings(100, seed), cov_scaling=scaling)
    assert res.theta_est_var <= res.theta_hat_var + 1e-12
    assert res.theta_est_var >= 0


@pytest.mark.parametrize("method", [Method.MVAR, Method.MMSE])
def test_zero_discrepancy_fixed_point(sales, method):
    eta = [eval_statistic(S.mean("B"), sales), eval_statistic(S.median("B"), sales)]
    p = Problem(TARGET, [Src(S.mean("B"), eta[0], 5.0, True), Src(S.median("B"), eta[1], 9.0, False)])
    res = estimate(sales, p, BootstrapSettings(300, 1), method=method)
    assert res.delta_hat == (0.0, 0.0)
    assert res.theta_est == res.theta_hat
    assert res.correction == 0.0


def test_exact_knowledge_collapse(sales):
    theta_hat = eval_statistic(TARGET, sales)
    p = Problem(TARGET, [Src(TARGET, theta_hat, 0.0)])
    res = mvar(sales, p, BootstrapSettings(500, 4))
    assert res.theta_est == theta_hat
    assert res.theta_est_var <= 0.05 * res.theta_hat_var


def test_all_unbiased_mmse_equals_mvar(sales):
    st_ = BootstrapSettings(2000, 77)
    a = mvar(sales, sales_problem(), st_)
    b = mmse(sales, sales_problem(), st_)
    assert (a.theta_est, a.theta_est_var, a.theta_hat_var, a.retained_eigs) == \
           (b.theta_est, b.theta_est_var, b.theta_hat_var, b.retained_eigs)
    assert b.method is Method.MMSE


@pytest.mark.parametrize("scaling", ["n-1", "none"])
def test_mmse_suppresses_growing_bias(sales, scaling):
    eta = eval_statistic(S.mean("B"), sales)
    st_ = BootstrapSettings(1000, 8)
    boot = bootstrap_joint(sales, TARGET, [S.mean("B")], st_)

    def correction(t):
        p = Problem(TARGET, [Src(S.mean("B"), eta - t * 2.0, 1912.8 / 260, True)])
        return abs(mmse(sales, p, st_, boot=boot, cov_scaling=scaling).correction)

    base = correction(1.0)
    assert base > 0
    assert correction(1e6) <= 0.01 * base


def test_known_zero_bias_equals_mvar(sales):
    st_ = BootstrapSettings(500, 2)
    a = mvar(sales, sales_problem(), st_)
    b = estimate(sales, sales_problem(), st_, method=Method.MMSE, fixed_delta=[0.0, 0.0])
    assert a.theta_est == b.theta_est and a.theta_est_var == b.theta_est_var


def test_cov_scaling_divides_empirical_block(sales):
    st_ = BootstrapSettings(500, 2)
    a = mvar(sales, sales_problem(), st_, cov_scaling="n-1")
    b = mvar(sales, sales_problem(), st_, cov_scaling="none")
    assert a.theta_hat_var * 35 == pytest.approx(b.theta_hat_var, rel=1e-12)
    with pytest.raises(ValidationError):
        mvar(sales, sales_problem(), st_, cov_scaling="sqrt")


def test_independent_information_is_ignored():
    rng = np.random.default_rng(11)
    n = 400
    d = Dataset({"A": rng.normal(100, 10, n), "C": rng.normal(0, 1, n)})
    p = Problem(S.normal_quantile("A", 0.3), [Src(S.mean("C"), 0.0, 1.0 / n)])
    res = mvar(d, p, BootstrapSettings(4000, 12), cov_scaling="none")
    sd = np.sqrt(res.theta_hat_var)
    assert abs(res.correction) <= 0.25 * sd
    assert res.relevance <= 0.02 * res.theta_hat_var


def test_cutoff_reduces_retained(sales):
    st_ = BootstrapSettings(500, 2)
    full = mvar(sales, sales_problem(), st_, eig_cutoff=1.0)
    part = mvar(sales, sales_problem(), st_, eig_cutoff=0.5)
    assert full.retained_eigs == 2 and part.retained_eigs == 1
    assert part.theta_est_var >= full.theta_est_var
