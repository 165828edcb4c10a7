import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from hetcd.errors import DimensionError, NonPositiveWeight, SingularDesign
from hetcd.regression import ols_fit, standardized_residuals, wls_fit


def test_exact_linear_fit():
    fit = ols_fit(np.array([[1.0], [2.0], [3.0]]), np.array([2.0, 4.0, 6.0]))
    np.testing.assert_allclose(fit.beta, [2.0], atol=1e-14)
    np.testing.assert_allclose(fit.residuals, 0.0, atol=1e-14)
    assert not fit.weighted


def test_no_regressors_returns_y():
    y = np.array([1.0, -1.0, 3.0])
    for X in (None, np.empty((3, 0))):
        fit = ols_fit(X, y)
        assert fit.beta.shape == (0,)
        np.testing.assert_array_equal(fit.residuals, y)


def test_ols_matches_explicit_normal_equations():
    rng = np.random.default_rng(7)
    X = rng.standard_normal((6, 2))
    y = rng.standard_normal(6)
    expected = np.linalg.inv(X.T @ X) @ (X.T @ y)
    np.testing.assert_allclose(ols_fit(X, y).beta, expected, rtol=1e-12, atol=1e-13)


def test_unit_weights_reduce_to_ols():
    rng = np.random.default_rng(3)
    X = rng.standard_normal((50, 3))
    y = X @ [1.0, -2.0, 0.5] + rng.standard_normal(50)
    np.testing.assert_allclose(wls_fit(X, y, np.ones(50)).beta, ols_fit(X, y).beta, atol=1e-12)


@settings(max_examples=60, deadline=None)
@given(n=st.integers(8, 60), k=st.integers(1, 4), seed=st.integers(0, 2**32 - 1))
def test_wls_equals_sqrt_weight_scaled_ols(n, k, seed):
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((n, k))
    y = rng.standard_normal(n)
    w = rng.uniform(0.05, 20.0, n)
    sw = np.sqrt(w)
    oracle = np.linalg.lstsq(X * sw[:, None], y * sw, rcond=None)[0]
    np.testing.assert_allclose(wls_fit(X, y, w).beta, oracle, atol=1e-10, rtol=0)


def test_weight_acts_as_multiplicity():
    rng = np.random.default_rng(11)
    X = rng.standard_normal((10, 2))
    y = rng.standard_normal(10)
    w = np.ones(10)
    w[0] = 2.0
    Xd = np.vstack([X, X[:1]])
    yd = np.append(y, y[0])
    np.testing.assert_allclose(wls_fit(X, y, w).beta, wls_fit(Xd, yd, np.ones(11)).beta, atol=1e-12)


def test_wls_residuals_are_unweighted():
    rng = np.random.default_rng(5)
    X = rng.standard_normal((30, 2))
    y = rng.standard_normal(30)
    w = rng.uniform(0.5, 3, 30)
    fit = wls_fit(X, y, w)
    assert fit.weighted
    np.testing.assert_allclose(fit.residuals, y - X @ fit.beta, atol=1e-14)


@pytest.mark.parametrize("seed", range(5))
def test_residual_orthogonality(seed):
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((100, 4))
    y = rng.standard_normal(100)
    w = rng.uniform(0.2, 5, 100)
    r_ols = ols_fit(X, y).residuals
    r_wls = wls_fit(X, y, w).residuals
    assert np.max(np.abs(X.T @ r_ols)) < 1e-8
    assert np.max(np.abs(X.T @ (w * r_wls))) < 1e-8


def test_singular_design_raises():
    x = np.arange(10.0)
    with pytest.raises(SingularDesign):
        ols_fit(np.column_stack([x, 2 * x]), np.ones(10))
    with pytest.raises(SingularDesign):
        wls_fit(np.zeros((5, 1)), np.ones(5), np.ones(5))


def test_dimension_errors():
    with pytest.raises(DimensionError):
        ols_fit(np.ones((4, 1)), np.ones(5))
    with pytest.raises(DimensionError):
        wls_fit(np.ones((5, 1)), np.ones(5), np.ones(4))


@pytest.mark.parametrize("bad", [0.0, -1.0, np.inf, np.nan])
def test_nonpositive_weight(bad):
    w = np.ones(5)
    w[2] = bad
    with pytest.raises(NonPositiveWeight):
        wls_fit(np.ones((5, 1)), np.arange(5.0), w)
    with pytest.raises(NonPositiveWeight):
        standardized_residuals(ols_fit(None, np.arange(5.0)), w)


def test_standardized_residuals_formula():
    fit = ols_fit(None, np.array([2.0, 2.0]))
    np.testing.assert_allclose(standardized_residuals(fit, np.array([1.0, 4.0])), [2.0, 4.0])
    np.testing.assert_array_equal(standardized_residuals(fit, np.ones(2)), fit.residuals)


def test_standardized_residuals_are_homoskedastic():
    rng = np.random.default_rng(2024)
    n = 5000
    x = rng.standard_normal(n)
    sigma = np.linspace(0.5, 5.0, n)
    y = 0.5 * x + sigma * rng.standard_normal(n)
    w = 1.0 / sigma**2
    z = standardized_residuals(wls_fit(x, y, w), w)
    v1, v2 = z[: n // 2].var(), z[n // 2:].var()
    assert abs(v1 - v2) / max(v1, v2) < 0.10
    raw = wls_fit(x, y, w).residuals
    assert raw[n // 2:].var() > 4 * raw[: n // 2].var()


def test_ols_slope_unbiased_under_heteroskedasticity():
    rng = np.random.default_rng(99)
    betas = []
    for _ in range(1000):
        x = rng.standard_normal(100)
        eps = (1 + 3 * np.abs(x)) * rng.standard_normal(100)
        betas.append(ols_fit(x, 0.5 * x + eps).beta[0])
    betas = np.array(betas)
    se = betas.std(ddof=1) / np.sqrt(betas.size)
    assert abs(betas.mean() - 0.5) < 3 * se
