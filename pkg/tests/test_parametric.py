import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ineqreg.curves import Sample, default_grid
from ineqreg.exceptions import ValidationError
from ineqreg.numerics import gradient_relative_error, normal_cdf, normal_quantile
from ineqreg.parametric import (conditional_delta, lognormal_conditional_curves,
                                lognormal_conditional_lorenz, lognormal_fit,
                                lognormal_loglik, lognormal_score, pareto_conditional_curves,
                                pareto_fit, pareto_lorenz, pareto_loglik,
                                pareto_scale_estimate, pareto_score)
from ineqreg.simulation import LognormalSpec, ParetoSpec, binary_design, simulate


def test_scale_estimate():
    assert pareto_scale_estimate([2.0, 5.0, 3.0]) == pytest.approx(1.5)


def test_pareto_binary_covariate_closed_form():
    s = simulate(ParetoSpec(2.0, (np.log(0.4), 0.5)), 3000, seed=5, design=binary_design())
    fit = pareto_fit(s)
    z = np.log(s.y / pareto_scale_estimate(s.y))
    g = s.covariates[:, 0] == 1
    m0, m1 = z[~g].mean(), z[g].mean()
    np.testing.assert_allclose(fit.beta_hat.beta, [np.log(m0), np.log(m1 / m0)], atol=1e-7)
    # at the MLE the information is [[n, n1], [n1, n1]]
    np.testing.assert_allclose(fit.se, [1 / np.sqrt((~g).sum()),
                                        np.sqrt(1 / g.sum() + 1 / (~g).sum())], rtol=1e-5)
    assert fit.converged


def test_pareto_fit_scale_equivariant():
    s = simulate(ParetoSpec(1.0, (np.log(0.3), 0.3, -0.2)), 500, seed=2)
    a = pareto_fit(s)
    b = pareto_fit(s.scaled(1e3))
    np.testing.assert_allclose(b.beta_hat.beta, a.beta_hat.beta, atol=1e-7)
    assert b.lambda_hat == pytest.approx(1e3 * a.lambda_hat)


def test_lognormal_binary_covariate_closed_form():
    spec = LognormalSpec(0.5, (np.log(0.6), 0.7), 0.4)
    s = simulate(spec, 4000, seed=9, design=binary_design())
    fit = lognormal_fit(s)
    z = np.log(s.y)
    g = s.covariates[:, 0] == 1
    m0, m1 = z[~g].mean(), z[g].mean()
    s0, s1 = z[~g].std(), z[g].std()
    d0 = (m1 - m0) / (s1 / s0 - 1)
    np.testing.assert_allclose(fit.beta_hat.beta, [np.log(d0), np.log(s1 / s0)], atol=1e-6)
    assert fit.alpha_hat == pytest.approx(m0 - d0, abs=1e-6)
    assert fit.sigma0_hat == pytest.approx(s0 / d0, rel=1e-6)
    assert fit.converged


def test_lognormal_fixed_beta():
    spec = LognormalSpec(0.5, (np.log(0.6), 0.4), 0.4)
    s = simulate(spec, 2000, seed=4)
    fit = lognormal_fit(s, fixed_beta=spec.beta)
    delta = np.exp(s.x @ np.array(spec.beta))
    z = np.log(s.y)
    w = delta**-2.0
    alpha = np.sum(w * (z - delta)) / np.sum(w)
    sigma = np.sqrt(np.mean(w * (z - alpha - delta) ** 2))
    assert fit.alpha_hat == pytest.approx(alpha, abs=1e-7)
    assert fit.sigma0_hat == pytest.approx(sigma, rel=1e-7)
    assert np.all(fit.se[1:-1] == 0)


def test_lognormal_intercept_only_identifies_combinations():
    s = simulate(LognormalSpec(1.0, (np.log(0.5),), 0.3), 2000, seed=1)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        fit = lognormal_fit(s)
    delta = float(np.exp(fit.beta_hat.beta[0]))
    z = np.log(s.y)
    assert fit.alpha_hat + delta == pytest.approx(z.mean(), abs=1e-5)
    assert fit.sigma0_hat * delta == pytest.approx(z.std(), rel=1e-5)


@pytest.mark.parametrize("seed", range(10))
def test_gradients_match_finite_differences(seed):
    rng = np.random.default_rng(seed)
    x = np.column_stack([np.ones(50), rng.standard_normal((50, 2))])
    z = rng.exponential(size=50)
    beta = rng.normal(scale=0.5, size=3)
    assert gradient_relative_error(lambda b: pareto_loglik(b, x, z),
                                   lambda b: pareto_score(b, x, z), beta) < 1e-6
    theta = np.concatenate([rng.normal(size=1), beta, [rng.normal(scale=0.3)]])
    zz = rng.normal(size=50) + 1
    assert gradient_relative_error(lambda t: lognormal_loglik(t, x, zz),
                                   lambda t: lognormal_score(t, x, zz), theta) < 1e-6


def test_pareto_lorenz_closed_form():
    assert pareto_lorenz(0.5, 0.75) == 0.5
    with pytest.raises(ValidationError, match="Lorenz undefined"):
        pareto_lorenz(1.0, 0.5)
    with pytest.raises(ValidationError, match="Lorenz undefined"):
        pareto_conditional_curves(1.2)


def test_pareto_conditional_curves_and_gini():
    curves, idx = pareto_conditional_curves(0.25, default_grid(9))
    np.testing.assert_allclose(curves.L.v, pareto_lorenz(0.25, curves.u), rtol=1e-12)
    assert idx.gini == pytest.approx(0.25 / 1.75, abs=1e-9)


def test_lognormal_conditional_lorenz():
    u = default_grid(99)
    np.testing.assert_allclose(lognormal_conditional_lorenz(1e-300, 1.0, u).v, u, atol=1e-12)
    got = lognormal_conditional_lorenz(0.5, 2.0, u).v
    np.testing.assert_allclose(got, normal_cdf(normal_quantile(u) - 1.0), rtol=1e-14)
    curves, idx = lognormal_conditional_curves(0.5, 2.0, u)
    np.testing.assert_allclose(curves.L.v, got, atol=1e-8)
    assert idx.gini == pytest.approx(2 * normal_cdf(1 / np.sqrt(2)) - 1, abs=1e-8)


def test_conditional_delta():
    s = simulate(ParetoSpec(1.0, (np.log(0.3), 0.3)), 300, seed=0)
    fit = pareto_fit(s)
    assert conditional_delta(fit, [1.0, 0.0]) == pytest.approx(np.exp(fit.beta_hat.beta[0]))
    with pytest.raises(ValidationError):
        conditional_delta(fit, [0.0])


def test_too_few_rows():
    s = Sample.from_arrays([1.0, 2.0], [0.0, 1.0])
    with pytest.raises(ValidationError):
        pareto_fit(s)
    with pytest.raises(ValidationError):
        lognormal_fit(s)


@settings(max_examples=20, deadline=None)
@given(st.floats(0.05, 0.95), st.floats(0.01, 0.99))
def test_pareto_lorenz_bounds(delta, u):
    value = pareto_lorenz(delta, u)
    assert 0 <= value <= u
