import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats

from ineqreg.curves import (ContinuousDistribution, Sample, StepDistribution,
                            default_grid, exponential_distribution,
                            inequality_curves, inequality_indices,
                            lognormal_distribution, pareto_distribution, quantile,
                            uniform_distribution)
from ineqreg.exceptions import ValidationError

positive_samples = st.lists(st.floats(1e-3, 1e3, allow_nan=False), min_size=2, max_size=40)


def test_default_grid():
    u = default_grid(4)
    np.testing.assert_allclose(u, [0.2, 0.4, 0.6, 0.8])
    assert default_grid().size == 999


def test_sample_from_arrays_adds_intercept():
    s = Sample.from_arrays([3.0, 4.0, 5.0], [12.0, 16.0, 9.0], names=("educ",))
    assert (s.n, s.d) == (3, 1)
    np.testing.assert_array_equal(s.x, [[1, 12], [1, 16], [1, 9]])


@pytest.mark.parametrize("y, match", [
    ([1.0, -1.0, 2.0], "rows: 2"),
    ([0.0, 1.0], "rows: 1"),
    ([1.0, np.inf], "finite"),
    ([], "no data rows"),
])
def test_sample_validation(y, match):
    with pytest.raises(ValidationError, match=match):
        Sample.from_arrays(y)


def test_sample_needs_intercept():
    with pytest.raises(ValidationError, match="constant 1"):
        Sample([1.0, 2.0], [[0.0], [1.0]])


def test_step_quantile_is_left_inverse():
    step = StepDistribution.empirical([3.0, 1.0, 2.0, 2.0])
    np.testing.assert_allclose(step.cdf, [0.25, 0.75, 1.0])
    assert step.quantile(0.25) == 1.0
    assert step.quantile(0.2500001) == 2.0
    assert step.quantile(1.0) == 3.0
    with pytest.raises(ValidationError, match="u > 0"):
        step.quantile(0.0)


def test_defective_quantile_rejected():
    step = StepDistribution([1.0, 2.0], [0.3, 0.8])
    assert step.quantile(0.8) == 2.0
    with pytest.raises(ValidationError, match="beyond mass"):
        step.quantile(0.9)


def test_empirical_lorenz_three_points():
    # {1, 2, 3}: the poorest two thirds hold 3 of 6
    curves = inequality_curves(np.array([1.0, 2.0, 3.0]), [1 / 3, 2 / 3])
    np.testing.assert_allclose(curves.L.v, [1 / 6, 0.5], rtol=1e-14)
    np.testing.assert_allclose(curves.B.v, [0.5, 0.75], rtol=1e-14)
    np.testing.assert_allclose(curves.C.v, [1 / 3, 0.5], rtol=1e-14)
    np.testing.assert_allclose(curves.D.v, [1.0, 0.75], rtol=1e-14)


def test_empirical_indices_two_points():
    # y = {1, 3}: mu=2; L(u)=u/2 on [0,1/2], (3u-1)/2 after.
    # G = 1 - 2 int L = 1/4.  D = 1 - int mu(u)/(u q(u)) du: on (0,1/2] the
    # ratio is 1, on (1/2,1] it is (3u-1)/(3u), so D = (1/2) ... frozen below.
    idx = inequality_indices(np.array([1.0, 3.0]))
    assert idx.gini == pytest.approx(0.25, abs=1e-12)
    # B = 1 - int L/u: int_0^.5 1/2 + int_.5^1 (3 - 1/u)/2 = 1/4 + 3/4 - ln2/2
    assert idx.bonferroni == pytest.approx(np.log(2) / 2, abs=1e-12)
    # C = 1 - 2 int mu(u)/q(u) du, mu/q = u on (0,.5], (3u-1)/3 on (.5,1]
    assert idx.c_index == pytest.approx(1 - 2 * (1 / 8 + 5 / 24), abs=1e-12)
    # D = 1 - int mu/(u q): 1/2 + int_.5^1 (1 - 1/(3u)) du
    assert idx.d_index == pytest.approx(1 - (0.5 + 0.5 - np.log(2) / 3), abs=1e-12)


def test_degenerate_sample_is_exactly_egalitarian():
    y = np.full(10, 4.2)
    idx = inequality_indices(y)
    assert idx.as_dict() == {"gini": 0.0, "bonferroni": 0.0, "c_index": 0.0, "d_index": 0.0}
    curves = inequality_curves(y)
    np.testing.assert_allclose(curves.L.v, curves.u, rtol=1e-15)
    np.testing.assert_allclose(curves.B.v, 1.0, rtol=1e-15)


def test_uniform_closed_forms():
    # L(u)=u^2, B(u)=u, C(u)=u/2, D(u)=1/2 for uniform(0, b)
    dist = uniform_distribution(2.0)
    u = default_grid(9)
    c = inequality_curves(dist, u)
    np.testing.assert_allclose(c.L.v, u**2, atol=1e-12)
    np.testing.assert_allclose(c.B.v, u, atol=1e-12)
    np.testing.assert_allclose(c.C.v, u / 2, atol=1e-12)
    np.testing.assert_allclose(c.D.v, 0.5, atol=1e-12)
    idx = inequality_indices(dist)
    assert idx.gini == pytest.approx(1 / 3, abs=1e-9)
    assert idx.bonferroni == pytest.approx(0.5, abs=1e-9)
    assert idx.c_index == pytest.approx(0.5, abs=1e-9)
    assert idx.d_index == pytest.approx(0.5, abs=1e-9)


@pytest.mark.parametrize("delta", [0.2, 0.5, 0.8])
def test_pareto_curves_and_gini(delta):
    dist = pareto_distribution(delta, 3.0)
    u = default_grid(19)
    c = inequality_curves(dist, u)
    np.testing.assert_allclose(c.L.v, 1 - (1 - u) ** (1 - delta), rtol=1e-12)
    # C(u) = mu(u)/q(u) with mu(u) = lam (1-(1-u)^(1-delta))/(1-delta)
    q = 3.0 * (1 - u) ** (-delta)
    mu_u = 3.0 * (1 - (1 - u) ** (1 - delta)) / (1 - delta)
    np.testing.assert_allclose(c.C.v, mu_u / q, rtol=1e-8)
    assert inequality_indices(dist).gini == pytest.approx(delta / (2 - delta), abs=1e-9)


@pytest.mark.parametrize("sigma", [0.25, 1.0, 2.0])
def test_lognormal_gini(sigma):
    idx = inequality_indices(lognormal_distribution(sigma, 1.5))
    assert idx.gini == pytest.approx(2 * stats.norm.cdf(sigma / np.sqrt(2)) - 1, abs=1e-8)


def test_exponential_gini_is_half():
    assert inequality_indices(exponential_distribution(3.0)).gini == pytest.approx(0.5, abs=1e-9)


def test_quadrature_lorenz_matches_closed_form():
    # strip the closed form so the quantile is integrated numerically
    p = pareto_distribution(0.4)
    bare = ContinuousDistribution(p.quantile, p.cdf, p.mean)
    u = default_grid(9)
    np.testing.assert_allclose(inequality_curves(bare, u).L.v,
                               inequality_curves(p, u).L.v, atol=1e-8)


def test_large_sample_converges_to_population():
    y = np.random.default_rng(1).pareto(1 / 0.3, 200_000) + 1  # Pareto delta=0.3
    assert inequality_indices(y).gini == pytest.approx(0.3 / 1.7, abs=5e-3)


def test_grid_validation():
    with pytest.raises(ValidationError):
        inequality_curves(np.array([1.0, 2.0]), [0.0, 0.5])
    with pytest.raises(ValidationError):
        inequality_curves(np.array([1.0, 2.0]), [0.6, 0.5])


def test_quantile_helper():
    assert quantile(pareto_distribution(0.5, 2.0), 0.75) == pytest.approx(4.0)
    assert quantile(np.array([5.0, 1.0]), 0.5) == 1.0


@settings(max_examples=60, deadline=None)
@given(positive_samples)
def test_curve_bounds(y):
    y = np.array(y)
    c = inequality_curves(y, default_grid(49))
    assert np.all(c.L.v <= c.u + 1e-12)
    assert np.all(np.diff(c.L.v) >= -1e-12)
    assert np.all(c.B.v <= 1 + 1e-12)
    assert np.all(c.D.v <= 1 + 1e-12)
    idx = inequality_indices(y)
    for v in idx.as_dict().values():
        assert -1e-12 <= v <= 1


@settings(max_examples=60, deadline=None)
@given(positive_samples, st.sampled_from([1e-3, 0.5, 7.0, 1e6]))
def test_indices_scale_invariant(y, a):
    y = np.array(y)
    base = inequality_indices(y).as_dict()
    scaled = inequality_indices(a * y).as_dict()
    for k in base:
        assert scaled[k] == pytest.approx(base[k], abs=1e-12)


@settings(max_examples=40, deadline=None)
@given(positive_samples)
def test_indices_permutation_invariant(y):
    y = np.array(y)
    assert inequality_indices(y[::-1]).as_dict() == pytest.approx(inequality_indices(y).as_dict())
