import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ineqreg.curves import (ContinuousDistribution, default_grid,
                            exponential_distribution, inequality_curves,
                            inequality_indices, pareto_distribution,
                            uniform_distribution)
from ineqreg.exceptions import ValidationError
from ineqreg.orderings import e_order_check, r_order_check, star_order_check

deltas = st.floats(0.05, 0.95)


def power_of(base: ContinuousDistribution, alpha: float) -> ContinuousDistribution:
    """Survival function ``sf(base)**alpha``."""
    return ContinuousDistribution(
        quantile=lambda t: base.quantile(-np.expm1(np.log1p(-np.asarray(t)) / alpha)),
        cdf=lambda y: 1 - (1 - base.cdf(y)) ** alpha)


def cdf_power(alpha):
    """Law on [0, 1] with CDF ``z**alpha``."""
    return ContinuousDistribution(quantile=lambda t: np.asarray(t) ** (1 / alpha),
                                  cdf=lambda z: np.clip(z, 0, 1) ** alpha)


def test_star_reflexive():
    p = pareto_distribution(0.4)
    rep = star_order_check(p, p)
    assert rep.holds and rep.max_violation == 0.0


def test_star_pareto_pair():
    assert star_order_check(pareto_distribution(0.3), pareto_distribution(0.6)).holds
    rep = star_order_check(pareto_distribution(0.6), pareto_distribution(0.3))
    assert not rep.holds and rep.max_violation > 0.0
    # ratio (1-u)^0.3 falls from 1 to (1/1000)^0.3; relative drop at the last grid point
    assert rep.max_violation == pytest.approx(1 - (1 / 1000) ** 0.3 / (1 - 1 / 1000) ** 0.3, rel=1e-9)
    assert rep.witness_u == pytest.approx(0.999)


def test_star_accepts_bare_quantile_functions():
    assert star_order_check(lambda u: 1 + u, lambda u: (1 + u) ** 2).holds


def test_star_zero_quantile():
    with pytest.raises(ValidationError, match="ratio undefined at zero"):
        star_order_check(lambda u: u * 0, pareto_distribution(0.3))


def test_star_scale_invariant():
    f, h = pareto_distribution(0.6), pareto_distribution(0.3)
    base = star_order_check(f, h)
    for a in (1e-3, 7.0, 1e6):
        rep = star_order_check(f.scaled(a), h)
        assert rep.holds == base.holds
        assert rep.max_violation == pytest.approx(base.max_violation, rel=1e-12)


def test_e_order_examples():
    u = uniform_distribution(1.0)
    rep = e_order_check(u, cdf_power(2.0))
    assert not rep.holds
    # the chord of t^2 through the end grid points 0.001 and 0.999 has slope 1;
    # its gap to t^2 peaks at t = 1/2: 1e-6 + 0.499 - 0.25
    assert rep.max_violation == pytest.approx(0.249001, rel=1e-9)
    assert rep.witness_u == pytest.approx(0.5)
    assert e_order_check(u, cdf_power(0.5)).holds
    assert e_order_check(u, u).holds


def test_r_order_examples():
    base = exponential_distribution()
    assert r_order_check(base, base).holds
    assert r_order_check(base, power_of(base, 2.0)).holds
    assert not r_order_check(base, power_of(base, 0.5)).holds
    assert "convex-g" in r_order_check(base, power_of(base, 2.0)).relation


def test_empirical_self_comparison_passes_everything():
    y = np.random.default_rng(3).lognormal(size=400)
    for check in (star_order_check, e_order_check, r_order_check):
        rep = check(y, y)
        assert rep.holds and rep.tolerance == 0.01


def test_empirical_pareto_samples():
    rng = np.random.default_rng(11)
    lo = np.exp(-0.2 * np.log1p(-rng.random(20000)))
    hi = np.exp(-0.7 * np.log1p(-rng.random(20000)))
    assert star_order_check(lo, hi).holds
    assert not star_order_check(hi, lo).holds


def test_grid_errors():
    p = pareto_distribution(0.3)
    with pytest.raises(ValidationError):
        e_order_check(p, p, grid=[0.0, 0.5, 0.9])
    with pytest.raises(ValidationError):
        star_order_check(p, p, grid=[0.2, 0.5])


@settings(max_examples=20, deadline=None)
@given(deltas, deltas)
def test_star_order_implies_dominance(d1, d2):
    d1, d2 = sorted((d1, d2))
    f, h = pareto_distribution(d1), pareto_distribution(d2)
    assert star_order_check(f, h).holds
    u = default_grid(99)
    cf, ch = inequality_curves(f, u), inequality_curves(h, u)
    for name in ("L", "B", "C", "D"):
        assert np.all(getattr(cf, name).v >= getattr(ch, name).v - 1e-9)
    i_f, i_h = inequality_indices(f), inequality_indices(h)
    assert i_f.gini <= i_h.gini + 1e-9
    assert i_f.bonferroni <= i_h.bonferroni + 1e-9


@settings(max_examples=15, deadline=None)
@given(deltas, deltas, deltas)
def test_star_transitive(a, b, c):
    a, b, c = sorted((a, b, c))
    p = [pareto_distribution(d) for d in (a, b, c)]
    assert star_order_check(p[0], p[1]).holds and star_order_check(p[1], p[2]).holds
    assert star_order_check(p[0], p[2]).holds
