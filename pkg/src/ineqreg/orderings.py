"""Diagnostics for inequality orderings between two distributions.

Each check evaluates a transformed function on a probability grid and
measures the largest breach of the shape property that defines the ordering:

* star order: ``H^{-1}(u) / F^{-1}(u)`` nondecreasing (``F`` more egalitarian);
* e-order: ``g(t) = H(F^{-1}(t))`` concave;
* r-order: ``g(t) = Hbar(Fbar^{-1}(t))`` convex.

Breaches are cumulative (relative distance below the running maximum of
the ratio, or vertical distance to the concave majorant / convex minorant of
``g``), so slow drifts are not hidden by a fine grid.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .curves import (ContinuousDistribution, Sample, StepDistribution,
                     _check_grid, as_step_distribution, default_grid)
from .exceptions import ValidationError

ANALYTIC_TOL = 1e-8
EMPIRICAL_TOL = 0.01
EMPIRICAL_TRIM = (0.01, 0.99)


@dataclass(frozen=True)
class OrderingReport:
    holds: bool
    max_violation: float
    witness_u: float
    tolerance: float
    relation: str


def _is_empirical(dist) -> bool:
    return not (isinstance(dist, ContinuousDistribution) or callable(dist))


def _resolve(F, H, grid, tol):
    empirical = _is_empirical(F) or _is_empirical(H)
    if grid is None:
        grid = default_grid()
        if empirical:
            lo, hi = EMPIRICAL_TRIM
            grid = grid[(grid >= lo) & (grid <= hi)]
    u = _check_grid(grid)
    if u.size < 3:
        raise ValidationError("ordering checks need at least three grid points")
    if tol is None:
        tol = EMPIRICAL_TOL if empirical else ANALYTIC_TOL
    return u, tol


def _quantile_fn(dist):
    if isinstance(dist, ContinuousDistribution):
        return dist.quantile
    if callable(dist):
        return dist
    return as_step_distribution(dist).quantile


def _interpolated(dist) -> ContinuousDistribution:
    # Piecewise-linear CDF through the mid-points of each jump; a continuous
    # stand-in for a step CDF so that F(F^{-1}(t)) = t on its range.
    step = as_step_distribution(dist)
    keep = step.masses > 0
    s = step.support[keep]
    mid = (step.cdf - step.masses / 2)[keep]
    if s.size < 2:
        raise ValidationError("need at least two distinct support points")
    return ContinuousDistribution(
        quantile=lambda t: np.interp(t, mid, s),
        cdf=lambda y: np.interp(y, s, mid, left=0.0, right=1.0),
        name="interpolated step")


def _as_continuous(dist) -> ContinuousDistribution:
    if isinstance(dist, ContinuousDistribution):
        return dist
    if isinstance(dist, (StepDistribution, Sample, np.ndarray, list, tuple)):
        return _interpolated(dist)
    raise ValidationError("e/r-order checks need a CDF; pass a distribution, not a bare quantile function")


def star_order_check(F, H, grid=None, tol=None) -> OrderingReport:
    """Check ``F <_* H``: the quantile ratio ``H^{-1}(u)/F^{-1}(u)`` never decreases.

    The breach at ``u`` is the relative drop of the ratio below its running
    maximum, which keeps the verdict unchanged when either law is rescaled.
    """
    u, tol = _resolve(F, H, grid, tol)
    qf = np.asarray(_quantile_fn(F)(u), dtype=float)
    qh = np.asarray(_quantile_fn(H)(u), dtype=float)
    if np.any(qf == 0) or np.any(qh == 0):
        raise ValidationError("ratio undefined at zero")
    if np.any(qf < 0) or np.any(qh < 0):
        raise ValidationError("distributions must live on (0, inf)")
    ratio = qh / qf
    peak = np.maximum.accumulate(ratio)
    drop = (peak - ratio) / peak
    k = int(np.argmax(drop))
    worst = float(drop[k])
    holds = worst <= tol
    relation = ("F <_* H: F more egalitarian than H" if holds
                else "F <_* H rejected: quantile ratio decreases")
    return OrderingReport(holds, worst, float(u[k]), tol, relation)


def _upper_hull(u, g):
    # vertices of the least concave majorant of the points (u, g)
    idx = []
    for i in range(u.size):
        while len(idx) >= 2:
            a, b = idx[-2], idx[-1]
            # drop b when it lies on or below the chord from a to i
            if (g[b] - g[a]) * (u[i] - u[a]) <= (g[i] - g[a]) * (u[b] - u[a]):
                idx.pop()
            else:
                break
        idx.append(i)
    return np.asarray(idx)


def _shape_breach(u, g, shape):
    """Largest vertical gap between ``g`` and its concave majorant (or convex minorant).

    The gap is zero exactly when the sampled points are concave (convex), and
    it is measured in the units of ``g``, so a fine grid does not inflate it.
    """
    sign = 1.0 if shape == "concave" else -1.0
    h = sign * g
    hull = _upper_hull(u, h)
    gap = np.interp(u, u[hull], h[hull]) - h
    k = int(np.argmax(gap))
    return max(float(gap[k]), 0.0), float(u[k])


def e_order_check(F, H, grid=None, tol=None) -> OrderingReport:
    """Check that ``g(t) = H(F^{-1}(t))`` is concave on the grid.

    Concave ``g`` is the definition of ``F`` representing more equality than
    ``H`` under transformation of distribution functions.
    """
    u, tol = _resolve(F, H, grid, tol)
    f, h = _as_continuous(F), _as_continuous(H)
    g = np.asarray(h.cdf(f.quantile(u)), dtype=float)
    worst, at = _shape_breach(u, g, "concave")
    holds = worst <= tol
    relation = ("g = H(F^-1) concave: F more equal than H" if holds
                else "g = H(F^-1) not concave")
    return OrderingReport(holds, worst, at, tol, relation)


def r_order_check(F, H, grid=None, tol=None) -> OrderingReport:
    """Check that ``g(t) = Hbar(Fbar^{-1}(t))`` is convex on the grid.

    Only the shape of ``g`` is tested. For power transforms
    ``Hbar = Fbar**alpha`` the check holds for ``alpha >= 1``, which is the
    case where ``H`` is the more egalitarian law by Lorenz dominance; the
    report text therefore names the relation by its definition and makes no
    equality claim.
    """
    u, tol = _resolve(F, H, grid, tol)
    f, h = _as_continuous(F), _as_continuous(H)
    g = 1.0 - np.asarray(h.cdf(f.quantile(1.0 - u)), dtype=float)
    worst, at = _shape_breach(u, g, "convex")
    holds = worst <= tol
    relation = ("g = Hbar(Fbar^-1) convex: F >_r H by the convex-g definition"
                if holds else "g = Hbar(Fbar^-1) not convex")
    return OrderingReport(holds, worst, at, tol, relation)
