"""Shared numerical kernels.

Maximisation (BFGS and damped Newton), finite-difference utilities,
adaptive Simpson quadrature and the standard normal CDF/quantile.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import special

Objective = Callable[[np.ndarray], float]
Gradient = Callable[[np.ndarray], np.ndarray]

DEFAULT_TOL = 1e-9
_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class OptimizerReport:
    argmax: np.ndarray
    value: float
    grad_norm: float
    iterations: int
    converged: bool
    message: str = ""


def scaled_gradient_norm(g, theta, value) -> float:
    """Gradient size relative to the parameter and objective magnitudes.

    ``max_i |g_i| * max(|theta_i|, 1) / max(|value|, 1)``; invariant to the
    sample size scaling of a log-likelihood.
    """
    g = np.asarray(g, dtype=float)
    theta = np.asarray(theta, dtype=float)
    if not np.all(np.isfinite(g)):
        return np.inf
    return float(np.max(np.abs(g) * np.maximum(np.abs(theta), 1.0))
                 / max(abs(value), 1.0))


def _finite(v) -> bool:
    return bool(np.all(np.isfinite(v)))


def maximize(fun: Objective, grad: Gradient, x0, tol: float = DEFAULT_TOL,
             maxiter: int = 500) -> OptimizerReport:
    """Maximise ``fun`` by BFGS with a backtracking Armijo line search.

    Parameters
    ----------
    fun, grad : callable
        Objective and its analytic gradient.
    x0 : array_like
        Starting point; ``fun(x0)`` must be finite.
    tol : float
        Stop once :func:`scaled_gradient_norm` drops below ``tol``.
    maxiter : int
        Iteration cap; reaching it gives ``converged=False``.

    Steps that make the objective non-finite are shrunk like any other
    rejected step.
    """
    x = np.array(x0, dtype=float).ravel()
    f = float(fun(x))
    if not np.isfinite(f):
        raise ValueError("objective is not finite at the starting point")
    g = np.asarray(grad(x), dtype=float)
    k = x.size
    hinv = np.eye(k)  # inverse Hessian of -fun
    first_step = True
    gnorm = scaled_gradient_norm(g, x, f)
    it = 0
    message = "maximum iterations reached"
    while it < maxiter:
        if gnorm < tol:
            message = "gradient tolerance met"
            break
        it += 1
        direction = hinv @ g
        slope = float(g @ direction)
        if slope <= 0:
            hinv = np.eye(k)
            direction = g.copy()
            slope = float(g @ g)
        step = 1.0
        if first_step:
            step = min(1.0, 1.0 / max(np.max(np.abs(direction)), 1e-12))
        accepted = False
        # objective changes below this are rounding noise; the gradient still
        # carries information there, so a full step within noise is accepted
        noise = 64 * _EPS * max(abs(f), 1.0)
        while step > 1e-20:
            x_new = x + step * direction
            f_new = fun(x_new)
            if np.isfinite(f_new) and (
                    f_new > f + 1e-4 * step * slope
                    or (step == 1.0 and 1e-4 * slope < noise and f_new >= f - noise)):
                accepted = True
                break
            step *= 0.5
        if not accepted:
            if np.allclose(hinv, np.eye(k)):
                message = "line search failed"
                break
            hinv = np.eye(k)
            continue
        g_new = np.asarray(grad(x_new), dtype=float)
        s = x_new - x
        y = g - g_new  # gradient change of -fun
        sy = float(s @ y)
        if sy > 1e-12 * np.linalg.norm(s) * np.linalg.norm(y):
            if first_step:
                hinv = np.eye(k) * sy / float(y @ y)
            rho = 1.0 / sy
            v = np.eye(k) - rho * np.outer(s, y)
            hinv = v @ hinv @ v.T + rho * np.outer(s, s)
            first_step = False
        x, f, g = x_new, float(f_new), g_new
        gnorm = scaled_gradient_norm(g, x, f)
    else:
        if gnorm < tol:
            message = "gradient tolerance met"
    return OptimizerReport(argmax=x, value=f, grad_norm=gnorm, iterations=it,
                           converged=bool(gnorm < tol), message=message)


def newton_maximize(fun: Objective, grad: Gradient, hess, x0,
                    tol: float = 1e-8, maxiter: int = 100,
                    max_abs_param: float = 50.0) -> OptimizerReport:
    """Maximise a concave objective by Newton steps with step halving.

    Convergence needs both a small :func:`scaled_gradient_norm` and a
    negligible Newton step; along a monotone likelihood the gradient fades
    while the step stays of order one. Iterates whose parameters exceed
    ``max_abs_param`` in absolute value are reported as divergent with
    ``converged=False``.
    """
    x = np.array(x0, dtype=float).ravel()
    f = float(fun(x))
    if not np.isfinite(f):
        raise ValueError("objective is not finite at the starting point")

    def newton_direction(x, g):
        try:
            direction = np.linalg.solve(-np.asarray(hess(x), dtype=float), g)
        except np.linalg.LinAlgError:
            return g.copy()
        return direction if float(g @ direction) > 0 else g.copy()

    def done(x, g, direction, f):
        small_step = np.all(np.abs(direction) <= 1e-6 * np.maximum(np.abs(x), 1.0))
        return scaled_gradient_norm(g, x, f) < tol and bool(small_step)

    g = np.asarray(grad(x), dtype=float)
    direction = newton_direction(x, g)
    it = 0
    message = "maximum iterations reached"
    converged = done(x, g, direction, f)
    while not converged and it < maxiter:
        it += 1
        step = 1.0
        while step > 1e-20:
            x_new = x + step * direction
            f_new = fun(x_new)
            if np.isfinite(f_new) and f_new >= f:
                break
            step *= 0.5
        else:
            message = "step halving failed"
            break
        improvement = f_new - f
        x, f = x_new, float(f_new)
        g = np.asarray(grad(x), dtype=float)
        if np.max(np.abs(x)) > max_abs_param:
            message = ("coefficients diverging: likelihood appears monotone "
                       "(perfect separation in the risk ordering)")
            return OptimizerReport(x, f, scaled_gradient_norm(g, x, f), it, False, message)
        direction = newton_direction(x, g)
        converged = done(x, g, direction, f)
        if not converged and improvement == 0.0:
            message = "no further improvement possible"
            break
    if converged:
        message = "gradient tolerance met"
    return OptimizerReport(argmax=x, value=f, grad_norm=scaled_gradient_norm(g, x, f),
                           iterations=it, converged=converged, message=message)


def central_difference_gradient(fun: Objective, theta, step=None) -> np.ndarray:
    theta = np.asarray(theta, dtype=float)
    if step is None:
        step = _EPS ** (1 / 3) * (1.0 + np.abs(theta))
    step = np.broadcast_to(np.asarray(step, dtype=float), theta.shape)
    out = np.empty_like(theta)
    for i in range(theta.size):
        e = np.zeros_like(theta)
        e[i] = step[i]
        out[i] = (fun(theta + e) - fun(theta - e)) / (2 * step[i])
    return out


def gradient_relative_error(fun: Objective, grad: Gradient, theta) -> float:
    """Relative discrepancy between ``grad`` and central differences of ``fun``."""
    analytic = np.asarray(grad(theta), dtype=float)
    numeric = central_difference_gradient(fun, theta)
    scale = max(np.max(np.abs(analytic)), np.max(np.abs(numeric)), 1e-300)
    return float(np.max(np.abs(analytic - numeric)) / scale)


def observed_information(grad: Gradient, theta) -> np.ndarray:
    """Negative Hessian from central differences of the analytic gradient.

    The step for coordinate ``i`` is ``1e-5 * (1 + |theta_i|)``; the result is
    symmetrised.
    """
    theta = np.asarray(theta, dtype=float)
    k = theta.size
    h = 1e-5 * (1.0 + np.abs(theta))
    hess = np.empty((k, k))
    for i in range(k):
        e = np.zeros(k)
        e[i] = h[i]
        hess[:, i] = (np.asarray(grad(theta + e)) - np.asarray(grad(theta - e))) / (2 * h[i])
    return -(hess + hess.T) / 2


def standard_errors(information) -> np.ndarray:
    """Square roots of the diagonal of the inverse information.

    Entries are NaN when the information is singular or not positive
    definite.
    """
    information = np.asarray(information, dtype=float)
    try:
        cov = np.linalg.inv(information)
    except np.linalg.LinAlgError:
        return np.full(information.shape[0], np.nan)
    d = np.diag(cov)
    with np.errstate(invalid="ignore"):
        return np.where(d > 0, np.sqrt(np.abs(d)), np.nan)


def simpson_integrate(f, a: float, b: float, tol: float = 1e-9,
                      max_depth: int = 60) -> float:
    """Adaptive composite Simpson quadrature of a vectorised ``f`` on [a, b].

    Subintervals are refined breadth first until the Richardson error
    estimate of each falls below its share of ``tol``.
    """
    if b == a:
        return 0.0
    if b < a:
        return -simpson_integrate(f, b, a, tol, max_depth)
    n0 = 16
    edges = np.linspace(a, b, n0 + 1)
    lo, hi = edges[:-1], edges[1:]
    mid = (lo + hi) / 2
    flo = np.asarray(f(lo), dtype=float)
    fhi = np.asarray(f(hi), dtype=float)
    fmid = np.asarray(f(mid), dtype=float)
    whole = (hi - lo) / 6 * (flo + 4 * fmid + fhi)
    tols = np.full(n0, tol / n0)
    total = 0.0
    for depth in range(max_depth):
        lm = (lo + mid) / 2
        rm = (mid + hi) / 2
        flm = np.asarray(f(lm), dtype=float)
        frm = np.asarray(f(rm), dtype=float)
        left = (mid - lo) / 6 * (flo + 4 * flm + fmid)
        right = (hi - mid) / 6 * (fmid + 4 * frm + fhi)
        delta = left + right - whole
        done = np.abs(delta) <= 15 * tols
        if depth == max_depth - 1:
            done[:] = True
        total += float(np.sum((left + right + delta / 15)[done]))
        keep = ~done
        if not keep.any():
            break
        lo, mid, hi = (np.concatenate([lo[keep], mid[keep]]),
                       np.concatenate([lm[keep], rm[keep]]),
                       np.concatenate([mid[keep], hi[keep]]))
        flo, fmid, fhi = (np.concatenate([flo[keep], fmid[keep]]),
                          np.concatenate([flm[keep], frm[keep]]),
                          np.concatenate([fmid[keep], fhi[keep]]))
        whole = np.concatenate([left[keep], right[keep]])
        tols = np.concatenate([tols[keep], tols[keep]]) / 2
    return total


def normal_cdf(z):
    return special.ndtr(z)


def normal_quantile(p):
    return special.ndtri(p)


def spawn_generators(seed: int, count: int) -> list[np.random.Generator]:
    """Independent PCG64 streams for parallel or repeated work.

    Stream ``r`` is ``SeedSequence(seed).spawn(count)[r]``, so replication
    ``r`` sees the same stream regardless of how many run concurrently.
    """
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(count)]
