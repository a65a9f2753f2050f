"""Scaled power-transformation regression: Pareto and log-normal families.

Both models let the conditional law of ``Y`` given ``x`` depend on
``Delta(x) = exp(x'beta)``; larger ``Delta`` means more inequality. The
Pareto model has ``log(Y/lam)`` exponential with mean ``Delta(x)``; the
log-normal model has ``log Y ~ N(alpha + Delta(x), sigma0**2 Delta(x)**2)``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .curves import (CurveSet, IndexSet, Sample, inequality_curves,
                     inequality_indices, lognormal_distribution,
                     pareto_distribution, CurveGrid, _check_grid, default_grid)
from .exceptions import ConvergenceWarning, ValidationError
from .numerics import (DEFAULT_TOL, OptimizerReport, maximize, normal_cdf,
                       normal_quantile, observed_information, standard_errors)


@dataclass(frozen=True)
class DeltaLink:
    """Inequality link ``Delta(x) = exp(x'beta)``, intercept first."""

    beta: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "beta", np.asarray(self.beta, dtype=float).ravel())

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return np.exp(x @ self.beta)


@dataclass(frozen=True)
class ParetoFit:
    lambda_hat: float
    beta_hat: DeltaLink
    se: np.ndarray
    loglik: float
    converged: bool
    report: OptimizerReport = field(repr=False)

    def delta(self, x) -> np.ndarray:
        return self.beta_hat(x)


@dataclass(frozen=True)
class LognormalFit:
    alpha_hat: float
    beta_hat: DeltaLink
    sigma0_hat: float
    se: np.ndarray  # (alpha, beta..., sigma0)
    loglik: float
    converged: bool
    report: OptimizerReport = field(repr=False)

    def delta(self, x) -> np.ndarray:
        return self.beta_hat(x)


def _require(sample: Sample, min_extra: int, what: str):
    if not isinstance(sample, Sample):
        raise ValidationError("expected a Sample")
    if sample.n <= sample.d + min_extra:
        raise ValidationError(f"{what} needs more than d+{min_extra} observations")


# -- Pareto ------------------------------------------------------------------

def pareto_scale_estimate(y) -> float:
    """``n * min(y) / (n + 1)``."""
    y = np.asarray(y, dtype=float)
    return y.size * float(y.min()) / (y.size + 1)


def pareto_loglik(beta, x, z) -> float:
    eta = x @ beta
    return float(-np.sum(eta) - np.sum(z * np.exp(-eta)))


def pareto_score(beta, x, z) -> np.ndarray:
    eta = x @ beta
    return x.T @ (z * np.exp(-eta) - 1.0)


def pareto_fit(sample: Sample, tol: float = DEFAULT_TOL) -> ParetoFit:
    """Maximum likelihood fit of the Pareto regression with ``lam`` plugged in.

    Standard errors come from the observed information at ``beta_hat``
    treating ``lam`` as known.
    """
    _require(sample, 1, "Pareto fit")
    lam = pareto_scale_estimate(sample.y)
    x = np.asarray(sample.x)
    z = np.log(sample.y) - np.log(lam)
    start = np.zeros(x.shape[1])
    start[0] = np.log(np.mean(z))

    fun = lambda b: pareto_loglik(b, x, z)
    grad = lambda b: pareto_score(b, x, z)
    with np.errstate(over="ignore"):
        rep = maximize(fun, grad, start, tol=tol)
        se = standard_errors(observed_information(grad, rep.argmax))
    if not rep.converged:
        warnings.warn(f"Pareto fit did not converge: {rep.message}", ConvergenceWarning)
    return ParetoFit(lam, DeltaLink(rep.argmax), se, rep.value, rep.converged, rep)


def pareto_lorenz(delta, u):
    """Closed-form conditional Lorenz curve ``1 - (1 - u)**(1 - delta)``."""
    if delta >= 1:
        raise ValidationError("conditional mean infinite; Lorenz undefined")
    if delta <= 0:
        raise ValidationError("delta must be positive")
    u = np.asarray(u, dtype=float)
    return -np.expm1((1 - delta) * np.log1p(-u))


def pareto_conditional_curves(delta, grid=None, lam: float = 1.0):
    """Curves and indices of the conditional Pareto law with shape ``delta``.

    Use :func:`conditional_delta` to get ``delta`` from a fit and a covariate
    row. Curves and indices are scale free, so ``lam`` is immaterial.
    """
    if delta >= 1:
        raise ValidationError("conditional mean infinite; Lorenz undefined")
    dist = pareto_distribution(delta, lam)
    return inequality_curves(dist, grid), inequality_indices(dist)


def conditional_delta(fit, x) -> float:
    """``Delta(x)`` for one covariate row (intercept first)."""
    x = np.asarray(x, dtype=float).ravel()
    if x.size != fit.beta_hat.beta.size:
        raise ValidationError(
            f"covariate row has {x.size} entries, model has {fit.beta_hat.beta.size}")
    return float(fit.beta_hat(x))


# -- log-normal ----------------------------------------------------------------

def _unpack_lognormal(theta):
    return theta[0], theta[1:-1], theta[-1]


def lognormal_loglik(theta, x, z) -> float:
    """Log-likelihood in ``theta = (alpha, beta..., log sigma0)`` without the constant."""
    alpha, beta, log_s = _unpack_lognormal(theta)
    eta = x @ beta
    resid = z - alpha - np.exp(eta)
    return float(-z.size * log_s - np.sum(eta)
                 - 0.5 * np.exp(-2 * log_s) * np.sum(np.exp(-2 * eta) * resid**2))


def lognormal_score(theta, x, z) -> np.ndarray:
    alpha, beta, log_s = _unpack_lognormal(theta)
    eta = x @ beta
    delta = np.exp(eta)
    w = np.exp(-2 * eta)
    resid = z - alpha - delta
    inv_s2 = np.exp(-2 * log_s)
    d_alpha = inv_s2 * np.sum(w * resid)
    d_beta = x.T @ (-1.0 + inv_s2 * (w * resid**2 + w * resid * delta))
    d_log_s = -z.size + inv_s2 * np.sum(w * resid**2)
    return np.concatenate([[d_alpha], d_beta, [d_log_s]])


def lognormal_fit(sample: Sample, tol: float = DEFAULT_TOL, fixed_beta=None) -> LognormalFit:
    """Joint maximum likelihood in ``(alpha, beta, sigma0)``.

    ``sigma0`` is optimised on the log scale; its standard error is mapped
    back by the delta method. With ``fixed_beta`` the link is held fixed and
    only ``alpha`` and ``sigma0`` are estimated (their ``se`` entries are
    returned, the ``beta`` entries are zero).

    Without a non-constant covariate with nonzero effect the model is not
    identified: only ``alpha + Delta`` and ``sigma0 * Delta`` are estimable
    and the information matrix is singular.
    """
    _require(sample, 3 if fixed_beta is None else 2, "log-normal fit")
    x = np.asarray(sample.x)
    # centring makes the fit equivariant to rescaling y: only alpha moves
    shift = float(np.mean(np.log(sample.y)))
    z = np.log(sample.y) - shift
    k = x.shape[1]
    if fixed_beta is not None:
        beta0 = np.asarray(fixed_beta, dtype=float).ravel()
        if beta0.size != k:
            raise ValidationError("fixed_beta has the wrong length")
        delta = np.exp(x @ beta0)
        w = np.exp(-2 * x @ beta0)

        def fun(t):
            return lognormal_loglik(np.concatenate([[t[0]], beta0, [t[1]]]), x, z)

        def grad(t):
            g = lognormal_score(np.concatenate([[t[0]], beta0, [t[1]]]), x, z)
            return np.array([g[0], g[-1]])

        r = (z - delta) / delta
        start = np.array([np.sum(w * (z - delta)) / np.sum(w), np.log(np.std(r))])
    else:
        start = np.concatenate([[np.mean(z) - 1.0], np.zeros(k), [np.log(np.std(z))]])
        fun = lambda t: lognormal_loglik(t, x, z)
        grad = lambda t: lognormal_score(t, x, z)

    with np.errstate(over="ignore", invalid="ignore"):
        rep = maximize(fun, grad, start, tol=tol)
        se_raw = standard_errors(observed_information(grad, rep.argmax))
    if not rep.converged:
        warnings.warn(f"log-normal fit did not converge: {rep.message}", ConvergenceWarning)

    if fixed_beta is not None:
        alpha, log_s = rep.argmax
        beta = beta0
        se = np.concatenate([[se_raw[0]], np.zeros(k), [se_raw[1]]])
    else:
        alpha, beta, log_s = _unpack_lognormal(rep.argmax)
        se = se_raw.copy()
    sigma0 = float(np.exp(log_s))
    se[-1] = se[-1] * sigma0
    return LognormalFit(float(alpha) + shift, DeltaLink(beta), sigma0, se, rep.value,
                        rep.converged, rep)


def lognormal_conditional_lorenz(sigma0, delta, grid=None) -> CurveGrid:
    """``L(u|x) = Phi(Phi^{-1}(u) - sigma0 * Delta(x))`` on the grid.

    ``sigma0 = 0`` is the degenerate (egalitarian) limit ``L(u) = u``.
    """
    if sigma0 < 0 or delta <= 0:
        raise ValidationError("sigma0 must be nonnegative and delta positive")
    u = default_grid() if grid is None else _check_grid(grid)
    return CurveGrid(u, normal_cdf(normal_quantile(u) - sigma0 * delta))


def lognormal_conditional_curves(sigma0, delta, grid=None) -> tuple[CurveSet, IndexSet]:
    if sigma0 <= 0 or delta <= 0:
        raise ValidationError("sigma0 and delta must be positive")
    dist = lognormal_distribution(sigma0 * delta)
    return inequality_curves(dist, grid), inequality_indices(dist)
