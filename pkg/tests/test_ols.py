import numpy as np
import pytest
import scipy.stats
from hypothesis import given, settings
from hypothesis import strategies as st

from meterflow.errors import InsufficientDataError, SingularFitError
from meterflow.numerics.ols import betainc_regularized, ols_fit, student_t_two_tailed


def test_exact_linear_data_recovers_coefficients():
    x = np.arange(10.0).reshape(-1, 1)
    y = 1.0 + 2.0 * x[:, 0]
    fit = ols_fit(x, y)
    assert fit.coefficients == pytest.approx([1.0, 2.0], abs=1e-9)
    assert fit.adjusted_r2 == pytest.approx(1.0, abs=1e-9)


def test_constant_response_gives_zero_slope():
    x = np.arange(8.0).reshape(-1, 1)
    fit = ols_fit(x, np.full(8, 3.5))
    assert fit.coefficients == pytest.approx([3.5, 0.0], abs=1e-12)


def test_matches_normal_equations_oracle():
    rng = np.random.default_rng(42)
    x = rng.normal(size=(5, 2))
    y = rng.normal(size=5)
    fit = ols_fit(x, y)
    augmented = np.column_stack([np.ones(5), x])
    oracle = np.linalg.inv(augmented.T @ augmented) @ augmented.T @ y
    assert fit.coefficients == pytest.approx(oracle, abs=1e-8)


def test_diagnostics_match_scipy_oracle():
    rng = np.random.default_rng(7)
    n, m = 40, 3
    x = rng.normal(size=(n, m))
    y = 0.5 + x @ np.array([1.0, -0.5, 0.2]) + rng.normal(0, 0.3, n)
    fit = ols_fit(x, y)
    dof = n - m - 1
    expected_p = 2 * scipy.stats.t.sf(np.abs(fit.t_values), dof)
    assert fit.p_values == pytest.approx(expected_p, abs=1e-6)
    # standard errors against the closed form
    augmented = np.column_stack([np.ones(n), x])
    resid = y - augmented @ fit.coefficients
    sigma2 = resid @ resid / dof
    se = np.sqrt(np.diag(sigma2 * np.linalg.inv(augmented.T @ augmented)))
    assert fit.std_errors == pytest.approx(se, rel=1e-9)


def test_rank_deficient_design_raises():
    x = np.column_stack([np.arange(10.0), 2 * np.arange(10.0)])
    with pytest.raises(SingularFitError):
        ols_fit(x, np.arange(10.0))


def test_too_few_rows_raises():
    # two coefficients (intercept + slope) need strictly more than two rows
    with pytest.raises(InsufficientDataError):
        ols_fit(np.arange(2.0).reshape(-1, 1), np.arange(2.0))


@settings(max_examples=30, deadline=None)
@given(st.integers(min_value=0, max_value=10_000))
def test_residuals_orthogonal_to_design(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(8, 40))
    m = int(rng.integers(1, 4))
    x = rng.normal(size=(n, m))
    y = rng.normal(size=n)
    fit = ols_fit(x, y)
    for j in range(m):
        assert abs(float(fit.residuals @ x[:, j])) < 1e-8 * n
    assert abs(float(fit.residuals.sum())) < 1e-8 * n


@settings(max_examples=50, deadline=None)
@given(
    st.floats(min_value=0.5, max_value=50),
    st.floats(min_value=0.5, max_value=50),
    st.floats(min_value=1e-6, max_value=1 - 1e-6),
)
def test_incomplete_beta_matches_scipy(a, b, x):
    assert betainc_regularized(a, b, x) == pytest.approx(
        scipy.stats.beta.cdf(x, a, b), abs=1e-9
    )


def test_two_tailed_p_values_symmetric_and_bounded():
    t = np.array([-2.5, 0.0, 2.5])
    p = student_t_two_tailed(t, dof=12)
    assert p[0] == pytest.approx(p[2], rel=1e-12)
    assert p[1] == pytest.approx(1.0)
    assert np.all((p >= 0) & (p <= 1))
