import math

import numpy as np
import pytest
import statsmodels.api as sm
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, stats

from reqcomplexity.errors import DomainError, UsageError
from reqcomplexity.stats import (
    correlate,
    fisher_ci,
    kolmogorov_sf,
    ks_normal,
    ols_poly,
    pearson,
    t_cdf,
    t_two_sided_p,
)

from oracles import t_density


def test_pearson_trivial():
    x = [1.0, 2.0, 3.0, 5.0, 8.0]
    assert pearson(x, x) == 1.0
    assert pearson(x, [-v for v in x]) == -1.0


def test_pearson_by_hand():
    # x = (1,2,3), y = (1,2,4): cov terms (-1)(-4/3) + 0 + (1)(5/3) = 3,
    # sxx = 2, syy = 16/9 + 1/9 + 25/9 = 42/9
    assert pearson([1, 2, 3], [1, 2, 4]) == pytest.approx(3 / math.sqrt(2 * 42 / 9), abs=1e-15)


def test_pearson_errors():
    with pytest.raises(DomainError):
        pearson([1, 1, 1], [1, 2, 3])
    with pytest.raises(UsageError):
        pearson([1, 2], [1, 2])
    with pytest.raises(UsageError):
        pearson([1, 2, 3], [1, 2])


def test_fisher_ci_table_rows():
    low, high = fisher_ci(0.8919, 8)
    assert low == pytest.approx(0.504, abs=0.003) and high == pytest.approx(0.9804, abs=0.003)
    low, high = fisher_ci(0.9420, 8)
    assert low == pytest.approx(0.7059, abs=0.003) and high == pytest.approx(0.9897, abs=0.003)


def test_fisher_ci_zero_symmetric():
    low, high = fisher_ci(0.0, 20)
    assert low == -high


def test_fisher_ci_degenerate():
    with pytest.raises(DomainError):
        fisher_ci(1.0, 10)


@settings(max_examples=100)
@given(st.floats(-0.99, 0.99), st.integers(4, 500))
def test_fisher_ci_antisymmetric(r, n):
    low, high = fisher_ci(r, n)
    nlow, nhigh = fisher_ci(-r, n)
    assert (nlow, nhigh) == (-high, -low)
    assert low <= r <= high


@settings(max_examples=50)
@given(st.floats(-0.95, 0.95), st.integers(4, 400))
def test_fisher_ci_narrows_with_n(r, n):
    a, b = fisher_ci(r, n)
    c, d = fisher_ci(r, n + 1)
    assert d - c < b - a


def test_correlate_perfect_has_no_interval():
    c = correlate([1, 2, 3, 4], [2, 4, 6, 8])
    assert c.r == 1.0 and c.ci_low is None


def test_t_cdf_basics():
    for dof in (1, 2, 5, 30):
        assert t_cdf(0.0, dof) == 0.5
        assert t_cdf(math.inf, dof) == 1.0
        assert t_cdf(1e12, dof) == pytest.approx(1.0)


@pytest.mark.parametrize("t, dof", [(2.306, 8), (0.7, 3), (-1.5, 12), (4.0, 1), (10.0, 25)])
def test_t_cdf_against_quadrature(t, dof):
    upper, _ = integrate.quad(t_density, t, math.inf, args=(dof,), epsabs=1e-13, epsrel=1e-12)
    assert t_cdf(t, dof) == pytest.approx(1 - upper, abs=1e-8)


def test_t_two_sided_example():
    tail, _ = integrate.quad(t_density, 2.306, math.inf, args=(8,))
    assert t_two_sided_p(2.306, 8) == pytest.approx(2 * tail, abs=1e-9)
    assert t_two_sided_p(2.306, 8) == pytest.approx(0.050, abs=0.001)


def test_ols_exact_fits():
    x = np.linspace(-3, 4, 12)
    lin = ols_poly(x, 2 + 3 * x, 1)
    np.testing.assert_allclose(lin.beta, [2, 3], atol=1e-10)
    assert lin.r_squared == pytest.approx(1.0, abs=1e-12)
    quad = ols_poly(x, 1 + 2 * x**2, 2)
    np.testing.assert_allclose(quad.beta, [1, 0, 2], atol=1e-10)


def test_ols_matches_statsmodels():
    rng = np.random.default_rng(0)
    x = rng.uniform(0, 10, 30)
    y = 1.5 + 0.8 * x - 0.05 * x**2 + rng.normal(0, 1, 30)
    for degree in (1, 2):
        ours = ols_poly(x, y, degree)
        ref = sm.OLS(y, np.vander(x, degree + 1, increasing=True)).fit()
        np.testing.assert_allclose(ours.beta, ref.params, rtol=1e-10)
        np.testing.assert_allclose(ours.std_errors, ref.bse, rtol=1e-8)
        np.testing.assert_allclose(ours.p_values, ref.pvalues, rtol=1e-6, atol=1e-12)
        assert ours.r_squared == pytest.approx(ref.rsquared, abs=1e-12)
        assert ours.dof == ref.df_resid


def test_ols_residuals_orthogonal_and_pearson_link():
    rng = np.random.default_rng(1)
    x = rng.normal(size=25)
    y = 3 - 2 * x + rng.normal(size=25)
    for degree in (1, 2):
        fit = ols_poly(x, y, degree)
        design = np.vander(x, degree + 1, increasing=True)
        assert np.all(np.abs(design.T @ fit.residuals) <= 1e-8 * np.linalg.norm(y))
    fit = ols_poly(x, y, 1)
    assert pearson(x, y) == pytest.approx(fit.beta[1] * x.std() / y.std(), abs=1e-10)


def test_ols_zero_coefficient_rarely_significant():
    rng = np.random.default_rng(2024)
    accepted = 0
    for _ in range(200):
        x = rng.uniform(-2, 2, 20)
        y = 1 + 0 * x + rng.normal(0, 1, 20)
        accepted += ols_poly(x, y, 1).p_values[1] > 0.05
    assert accepted / 200 >= 0.90


def test_ols_errors():
    with pytest.raises(DomainError):
        ols_poly([2, 2, 2, 2, 2], [1, 2, 3, 4, 5], 2)
    with pytest.raises(UsageError):
        ols_poly([1, 2, 3], [1, 2, 3], 2)
    with pytest.raises(UsageError):
        ols_poly([1, 2, 3, 4], [1, 2, 3, 4], 3)


def test_nested_r2():
    rng = np.random.default_rng(3)
    for _ in range(20):
        x = rng.uniform(0, 5, 15)
        y = x + rng.normal(0, 1, 15)
        assert ols_poly(x, y, 2).r_squared >= ols_poly(x, y, 1).r_squared - 1e-12


def test_kolmogorov_sf_against_scipy():
    for lam in (0.2, 0.5, 0.8, 1.0, 1.36, 2.0, 3.0):
        assert kolmogorov_sf(lam) == pytest.approx(stats.kstwobign.sf(lam), abs=1e-10)
    assert kolmogorov_sf(0.05) == 1.0


def test_kolmogorov_sf_monotone():
    grid = np.linspace(0, 4, 400)
    values = [kolmogorov_sf(v) for v in grid]
    assert all(a >= b for a, b in zip(values, values[1:]))


def test_ks_statistic_against_scipy():
    rng = np.random.default_rng(4)
    x = rng.gamma(2.0, size=60)
    ours = ks_normal(x)
    ref = stats.kstest(x, "norm", args=(x.mean(), x.std(ddof=1)))
    assert ours.statistic == pytest.approx(ref.statistic, abs=1e-12)
    assert ours.p_value == pytest.approx(stats.kstwobign.sf(math.sqrt(60) * ref.statistic), abs=1e-10)
    assert "Lilliefors" in ours.note


def test_ks_accepts_normal_samples():
    rng = np.random.default_rng(5)
    accepted = sum(ks_normal(rng.normal(10, 3, 100)).p_value > 0.05 for _ in range(100))
    assert accepted >= 90


def test_ks_rejects_large_uniform_grid():
    # with moments estimated from the sample, the grid's D settles near 0.058,
    # so rejection at the 5% level needs n of several hundred
    assert ks_normal(np.linspace(0, 1, 1000)).p_value < 0.05
    assert ks_normal(np.linspace(0, 1, 100)).p_value > 0.05


def test_ks_errors():
    with pytest.raises(DomainError):
        ks_normal([3.0] * 10)
    with pytest.raises(UsageError):
        ks_normal([1, 2, 3])
