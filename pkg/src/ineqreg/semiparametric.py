"""Semiparametric generalized Pareto and Lehmann regression.

The generalized Pareto model is ``1 - F(y|x) = (1 - F0(y))**(1/Delta(x))``
with ``Delta(x) = exp(x'beta)`` and ``F0`` unrestricted. Its coefficients are
estimated from the Cox partial likelihood, which depends on the responses
only through their ranks, and ``F0`` by the Breslow-type product estimator.
The Lehmann model ``F(y|x) = F0(y)**power(x)`` is fitted by the same code
after reversing the response order, so its ``beta_hat`` is exactly the
generalized Pareto estimate for the reversed responses. In that
parametrisation the Lehmann power is ``1/Delta(x) = exp(-x'beta)``; the
baseline of a Lehmann fit is stored on the negated response scale.

The intercept cancels from the partial likelihood, so it is absorbed into
``F0``: the estimated baseline is the conditional law at ``Delta = 1``, i.e.
at covariates equal to zero. ``beta_hat`` keeps the intercept slot at 0.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .curves import CurveSet, IndexSet, Sample, StepDistribution, _check_grid, default_grid
from .exceptions import ConvergenceWarning, NumericalWarning, TiesError, ValidationError
from .numerics import OptimizerReport, newton_maximize, standard_errors
from .parametric import DeltaLink

GENERALIZED_PARETO = "generalized_pareto"
LEHMANN = "lehmann"
KINDS = (GENERALIZED_PARETO, LEHMANN)
_ALPHA_EPS = 1e-15


@dataclass(frozen=True)
class SemiparametricFit:
    beta_hat: DeltaLink
    se: np.ndarray
    partial_loglik: float
    baseline: StepDistribution
    jumps: np.ndarray
    model_kind: str
    converged: bool
    report: OptimizerReport = field(repr=False)

    def delta(self, x) -> np.ndarray:
        return self.beta_hat(x)


def _check_kind(kind: str):
    if kind not in KINDS:
        raise ValidationError(f"kind must be one of {KINDS}, got {kind!r}")


def _ordered(sample: Sample, kind: str):
    """Slope covariates sorted by increasing (possibly negated) response."""
    _check_kind(kind)
    y = np.asarray(sample.y)
    if np.unique(y).size != y.size:
        raise TiesError("ties unsupported: responses must be distinct")
    key = -y if kind == LEHMANN else y
    order = np.argsort(key, kind="stable")
    return order, np.asarray(sample.covariates)[order]


def _suffix_logsumexp(v: np.ndarray) -> np.ndarray:
    # log sum_{k >= i} exp(v_k); logaddexp keeps every risk set shifted by
    # its own running maximum.
    return np.logaddexp.accumulate(v[::-1])[::-1]


def _risk_moments(slopes: np.ndarray, z: np.ndarray):
    """Log risk-set sums and risk-set weighted means/second moments of ``z``."""
    a = -(z @ slopes)  # log hazard multiplier of each ordered subject
    log_s0 = _suffix_logsumexp(a)
    w = np.exp(a - a.max())
    s0 = np.cumsum(w[::-1])[::-1]
    s1 = np.cumsum((w[:, None] * z)[::-1], axis=0)[::-1]
    mean = s1 / s0[:, None]
    return a, log_s0, w, s0, mean


def partial_loglik(beta, sample: Sample, kind: str = GENERALIZED_PARETO,
                   gradient: bool = False):
    """Cox log partial likelihood of the slope coefficients.

    ``beta`` may include the intercept (first entry, ignored) or only the
    slopes. With ``gradient=True`` returns ``(value, gradient)`` where the
    gradient has the same length as ``beta``.
    """
    beta = np.asarray(beta, dtype=float).ravel()
    _, z = _ordered(sample, kind)
    with_intercept = beta.size == sample.d + 1
    if not with_intercept and beta.size != sample.d:
        raise ValidationError("beta length does not match the covariates")
    slopes = beta[1:] if with_intercept else beta
    value, grad = _pl_value_grad(slopes, z)
    if not gradient:
        return value
    return value, (np.concatenate([[0.0], grad]) if with_intercept else grad)


def _pl_value_grad(slopes, z):
    if z.shape[1] == 0:
        n = z.shape[0]
        return float(-np.sum(np.log(np.arange(n, 0, -1)))), np.zeros(0)
    a, log_s0, _, _, mean = _risk_moments(slopes, z)
    value = float(np.sum(a - log_s0))
    grad = np.sum(mean - z, axis=0)
    return value, grad


def _pl_hessian(slopes, z):
    _, _, w, s0, mean = _risk_moments(slopes, z)
    s2 = np.cumsum((w[:, None, None] * z[:, :, None] * z[:, None, :])[::-1], axis=0)[::-1]
    cov = s2 / s0[:, None, None] - mean[:, :, None] * mean[:, None, :]
    return -np.sum(cov, axis=0)


def breslow_baseline(beta, sample: Sample, kind: str = GENERALIZED_PARETO):
    """Product-limit estimate of ``F0`` at the ordered responses.

    Returns the baseline :class:`StepDistribution` and the jump sizes
    ``b_i = (1 - alpha_i) * prod_{j<i} alpha_j``, where
    ``alpha_j = (1 - w_j / sum_{k>=j} w_k) ** exp(eta_j)`` and
    ``w = exp(-eta)``. For the Lehmann kind the support is the negated
    response scale, matching the reversed ordering.
    """
    beta = np.asarray(beta, dtype=float).ravel()
    order, z = _ordered(sample, kind)
    slopes = beta[1:] if beta.size == sample.d + 1 else beta
    if slopes.size != sample.d:
        raise ValidationError("beta length does not match the covariates")
    eta = z @ slopes
    a = -eta
    log_p = a - _suffix_logsumexp(a)  # log of each subject's share of its risk set
    with np.errstate(divide="ignore", invalid="ignore"):
        alpha = np.exp(np.exp(eta) * np.log1p(-np.exp(log_p)))
    alpha[-1] = 0.0  # last risk set is a singleton
    bad = ~np.isfinite(alpha) | (alpha < 0) | (alpha > 1)
    if bad.any():
        warnings.warn(f"{int(bad.sum())} product-limit factors outside [0, 1] clamped",
                      NumericalWarning)
        alpha[bad] = np.clip(np.nan_to_num(alpha[bad], nan=_ALPHA_EPS),
                             _ALPHA_EPS, 1 - _ALPHA_EPS)
    surv = np.cumprod(alpha)
    prev = np.concatenate([[1.0], surv[:-1]])
    jumps = (1.0 - alpha) * prev
    cdf = 1.0 - surv
    y = np.asarray(sample.y)[order]
    support = -y if kind == LEHMANN else y
    return StepDistribution(support, cdf), jumps


def cox_fit(sample: Sample, kind: str = GENERALIZED_PARETO, tol: float = 1e-8,
            maxiter: int = 100) -> SemiparametricFit:
    """Maximise the partial likelihood by Newton steps with halving from 0.

    Standard errors come from the inverse observed information (analytic
    negative Hessian). A diverging likelihood (perfect separation in the risk
    ordering) yields ``converged=False`` and a warning.
    """
    _check_kind(kind)
    if sample.n <= sample.d + 1:
        raise ValidationError("semiparametric fit needs more than d+1 observations")
    _, z = _ordered(sample, kind)
    d = sample.d
    if d == 0:
        value, _ = _pl_value_grad(np.zeros(0), z)
        rep = OptimizerReport(np.zeros(0), value, 0.0, 0, True, "no covariates")
        se = np.zeros(0)
    else:
        fun = lambda b: _pl_value_grad(b, z)[0]
        grad = lambda b: _pl_value_grad(b, z)[1]
        hess = lambda b: _pl_hessian(b, z)
        rep = newton_maximize(fun, grad, hess, np.zeros(d), tol=tol, maxiter=maxiter)
        se = standard_errors(-_pl_hessian(rep.argmax, z))
        if not rep.converged:
            warnings.warn(f"partial likelihood fit did not converge: {rep.message}",
                          ConvergenceWarning)
    beta = np.concatenate([[0.0], rep.argmax])
    baseline, jumps = breslow_baseline(beta, sample, kind)
    return SemiparametricFit(DeltaLink(beta), np.concatenate([[np.nan], se]), rep.value,
                             baseline, jumps, kind, rep.converged, rep)


def lehmann_fit(sample: Sample, **kwargs) -> SemiparametricFit:
    return cox_fit(sample, LEHMANN, **kwargs)


def _delta_at(fit: SemiparametricFit, x) -> float:
    if np.ndim(x) == 0:
        return float(x)
    x = np.asarray(x, dtype=float).ravel()
    k = fit.beta_hat.beta.size
    if x.size == k - 1:
        x = np.concatenate([[1.0], x])
    if x.size != k:
        raise ValidationError(f"covariate row must have {k - 1} or {k} entries")
    return float(fit.beta_hat(x))


def transformed_level(u, delta):
    """Baseline probability ``1 - (1 - u)**delta`` matching conditional level ``u``."""
    with np.errstate(divide="ignore"):
        return -np.expm1(delta * np.log1p(-np.asarray(u, dtype=float)))


def transformed_quantile(baseline_quantile, u, delta):
    """``F0^{-1}(1 - (1 - u)**delta)`` for any baseline quantile function."""
    return baseline_quantile(transformed_level(u, delta))


def conditional_distribution(fit: SemiparametricFit, x) -> StepDistribution:
    """Estimated conditional law of ``Y`` at ``x`` as a step distribution.

    Atoms are the observed responses. For the generalized Pareto kind atom
    ``Y_(j)`` carries conditional CDF ``1 - (1 - F0(Y_(j)))**(1/Delta)``; for
    the Lehmann kind the same map is applied on the reversed scale and the
    result is flipped back.
    """
    delta = _delta_at(fit, x)
    cdf0 = fit.baseline.cdf
    with np.errstate(divide="ignore"):
        cond = -np.expm1(np.log1p(-cdf0) / delta)
    cond[cdf0 >= 1] = 1.0
    if fit.model_kind == GENERALIZED_PARETO:
        return StepDistribution(fit.baseline.support, cond)
    masses = np.diff(cond, prepend=0.0)[::-1]
    return StepDistribution(-fit.baseline.support[::-1], np.cumsum(masses))


def conditional_quantile(fit: SemiparametricFit, u, x):
    """Estimated conditional quantile at level ``u`` for covariates ``x``.

    ``x`` is a covariate row (with or without the leading 1) or directly a
    value of ``Delta``. The generalized Pareto kind evaluates the left
    inverse of the baseline at ``1 - (1 - u)**Delta``.
    """
    u = np.asarray(u, dtype=float)
    if np.any(u <= 0) or np.any(u >= 1):
        raise ValidationError("u must lie strictly inside (0, 1)")
    if fit.model_kind == LEHMANN:
        return conditional_distribution(fit, x).quantile(u)
    level = transformed_level(u, _delta_at(fit, x))
    if np.any(level > fit.baseline.total_mass):
        raise ValidationError("transformed probability beyond the baseline mass")
    # same rounding slack as the plug-in mean, so both pick the same atom
    level = np.minimum(level * (1 - 1e-12), fit.baseline.total_mass)
    return fit.baseline.quantile(np.maximum(level, np.finfo(float).tiny))


def conditional_mu(fit: SemiparametricFit, u, x, method: str = "plugin"):
    """Estimated ``mu(u|x) = int_0^u F^{-1}(t|x) dt``.

    ``method="plugin"`` (generalized Pareto kind only) uses the jump-weighted
    sum ``Delta^{-1} sum_j b_j Y_(j) (1 - F0(Y_(j)))**(1/Delta - 1)`` over
    atoms with ``F0(Y_(j)) <= 1 - (1 - u)**Delta``. It is a step function of
    ``u``. For ``Delta > 1`` the last atom (where ``F0 = 1``) has infinite
    weight and is dropped with a warning; for ``Delta < 1`` its weight is 0.

    ``method="exact"`` integrates the step quantile function of
    :func:`conditional_distribution` exactly.
    """
    u = np.atleast_1d(np.asarray(u, dtype=float))
    if np.any(u <= 0) or np.any(u > 1):
        raise ValidationError("u must lie in (0, 1]")
    if method == "exact":
        from .curves import _step_partial_integrals

        dist = conditional_distribution(fit, x)
        partial, _, _ = _step_partial_integrals(dist, u)
        return partial
    if method != "plugin":
        raise ValidationError("method must be 'plugin' or 'exact'")
    if fit.model_kind != GENERALIZED_PARETO:
        raise ValidationError("the plug-in sum applies to the generalized Pareto kind; "
                              "use method='exact'")
    delta = _delta_at(fit, x)
    y = fit.baseline.support
    cdf = fit.baseline.cdf
    if delta == 1.0:
        weight = np.ones_like(cdf)
    else:
        with np.errstate(divide="ignore"):
            weight = np.exp((1.0 / delta - 1.0) * np.log1p(-cdf))
    finite = np.isfinite(weight)
    if not finite.all():
        warnings.warn("dropping atoms with infinite weight (Delta > 1 where F0 = 1)",
                      NumericalWarning)
        weight = np.where(finite, weight, 0.0)
    terms = np.cumsum(fit.jumps * y * weight) / delta
    level = transformed_level(u, delta)
    # relative slack absorbs rounding in 1 - (1 - u)**Delta at jump points
    count = np.searchsorted(cdf, level * (1 + 1e-12), side="right")
    return np.where(count > 0, terms[np.maximum(count - 1, 0)], 0.0)


def conditional_curves(fit: SemiparametricFit, x, grid=None, method: str = "plugin") -> CurveSet:
    """Plug-in L, B, C, D curves of the conditional law at ``x``."""
    u = default_grid() if grid is None else _check_grid(grid)
    mu_u = conditional_mu(fit, u, x, method)
    mu_1 = float(conditional_mu(fit, 1.0, x, method)[0])
    if not mu_1 > 0:
        raise ValidationError("estimated conditional mean is not positive")
    q = np.asarray(conditional_quantile(fit, u, x), dtype=float)
    L = mu_u / mu_1
    C = mu_u / q
    return CurveSet.from_values(u, L, L / u, C, C / u)


def conditional_indices(fit: SemiparametricFit, x, grid=None, method: str = "plugin") -> IndexSet:
    """Indices of the plug-in conditional curves by quadrature over the grid."""
    from .curves import inequality_indices

    if grid is None:
        grid = default_grid(9999)
    return inequality_indices(conditional_curves(fit, x, grid, method))
