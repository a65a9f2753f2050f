"""Inequality curves (Lorenz, Bonferroni, C, D) and their summary indices.

Curves can be computed from a raw sample, from a right-continuous step
distribution, or from a continuous distribution given by its quantile
function. Empirical curves integrate the step quantile function exactly;
indices of continuous distributions use adaptive Simpson quadrature.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Union

import numpy as np

from .exceptions import ValidationError
from .numerics import normal_cdf, normal_quantile, simpson_integrate

DEFAULT_GRID_POINTS = 999
_MASS_TOL = 1e-9


def default_grid(points: int = DEFAULT_GRID_POINTS) -> np.ndarray:
    """Equally spaced grid ``1/(m+1), ..., m/(m+1)``; 0.001..0.999 for m=999."""
    if points < 1:
        raise ValidationError("grid needs at least one point")
    return np.arange(1, points + 1) / (points + 1)


def _check_grid(u) -> np.ndarray:
    u = np.atleast_1d(np.asarray(u, dtype=float))
    if u.ndim != 1 or u.size == 0:
        raise ValidationError("grid must be a non-empty vector")
    if np.any(u <= 0) or np.any(u >= 1):
        raise ValidationError("grid points must lie strictly inside (0, 1)")
    if np.any(np.diff(u) <= 0):
        raise ValidationError("grid points must be strictly increasing")
    return u


@dataclass(frozen=True)
class Sample:
    """Positive responses ``y`` with covariate rows ``x`` (intercept first)."""

    y: np.ndarray
    x: np.ndarray
    names: tuple = field(default=())

    def __post_init__(self):
        y = np.asarray(self.y, dtype=float).ravel()
        x = np.asarray(self.x, dtype=float)
        if x.ndim == 1:
            x = x.reshape(-1, 1)
        if y.size == 0:
            raise ValidationError("no data rows")
        if x.shape[0] != y.size:
            raise ValidationError(
                f"covariate rows ({x.shape[0]}) do not match responses ({y.size})")
        if not np.all(np.isfinite(y)) or not np.all(np.isfinite(x)):
            raise ValidationError("responses and covariates must be finite")
        bad = np.flatnonzero(y <= 0)
        if bad.size:
            raise ValidationError(
                "responses must be strictly positive; offending rows: "
                + ", ".join(str(i + 1) for i in bad[:20]))
        if x.shape[1] == 0 or not np.all(x[:, 0] == 1.0):
            raise ValidationError("first covariate column must be the constant 1")
        names = tuple(self.names)
        if names and len(names) != x.shape[1] - 1:
            raise ValidationError("one name per non-intercept covariate expected")
        y.setflags(write=False)
        x.setflags(write=False)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "names", names)

    @classmethod
    def from_arrays(cls, y, covariates=None, names=()) -> "Sample":
        """Build a sample, prepending the intercept column to ``covariates``."""
        y = np.asarray(y, dtype=float).ravel()
        if covariates is None:
            z = np.empty((y.size, 0))
        else:
            z = np.asarray(covariates, dtype=float)
            if z.ndim == 1:
                z = z.reshape(-1, 1)
        return cls(y, np.column_stack([np.ones(z.shape[0]), z]), names)

    @property
    def n(self) -> int:
        return self.y.size

    @property
    def d(self) -> int:
        """Number of covariates excluding the intercept."""
        return self.x.shape[1] - 1

    @property
    def covariates(self) -> np.ndarray:
        return self.x[:, 1:]

    def scaled(self, a: float) -> "Sample":
        return Sample(a * self.y, self.x, self.names)


@dataclass(frozen=True)
class StepDistribution:
    """Right-continuous step CDF with atoms at ``support``.

    ``cdf[k]`` is the cumulative probability at ``support[k]``; the final value
    may be below 1 for a defective distribution.
    """

    support: np.ndarray
    cdf: np.ndarray

    def __post_init__(self):
        s = np.asarray(self.support, dtype=float).ravel()
        c = np.asarray(self.cdf, dtype=float).ravel()
        if s.size == 0 or s.size != c.size:
            raise ValidationError("support and cdf must be non-empty and of equal length")
        if np.any(np.diff(s) <= 0):
            raise ValidationError("support must be strictly increasing")
        if np.any(np.diff(c) < 0) or c[0] < 0 or c[-1] > 1 + 1e-12:
            raise ValidationError("cdf must be nondecreasing within [0, 1]")
        s.setflags(write=False)
        c.setflags(write=False)
        object.__setattr__(self, "support", s)
        object.__setattr__(self, "cdf", c)

    @classmethod
    def empirical(cls, y) -> "StepDistribution":
        """Empirical CDF of ``y``; tied values are merged into one atom."""
        y = np.asarray(y, dtype=float).ravel()
        if y.size == 0:
            raise ValidationError("no data rows")
        values, counts = np.unique(y, return_counts=True)
        return cls(values, np.cumsum(counts) / y.size)

    @property
    def masses(self) -> np.ndarray:
        return np.diff(self.cdf, prepend=0.0)

    @property
    def total_mass(self) -> float:
        return float(self.cdf[-1])

    @property
    def mean(self) -> float:
        return float(self.masses @ self.support)

    def cdf_at(self, y):
        idx = np.searchsorted(self.support, np.asarray(y, dtype=float), side="right")
        return np.where(idx > 0, self.cdf[np.maximum(idx - 1, 0)], 0.0)

    def quantile(self, u):
        """Left-inverse ``inf{y : F(y) >= u}``."""
        u = np.asarray(u, dtype=float)
        if np.any(u <= 0):
            raise ValidationError("quantile requires u > 0")
        if np.any(u > self.total_mass):
            raise ValidationError("quantile undefined beyond mass")
        idx = np.searchsorted(self.cdf, u, side="left")
        out = self.support[np.minimum(idx, self.support.size - 1)]
        return out if out.ndim else float(out)

    def scaled(self, a: float) -> "StepDistribution":
        return StepDistribution(a * self.support, self.cdf)


@dataclass(frozen=True)
class ContinuousDistribution:
    """A continuous distribution on (0, inf) described by vectorised callables.

    ``lorenz`` is an optional closed form; without it the Lorenz curve is
    obtained by quadrature of ``quantile``.
    """

    quantile: Callable
    cdf: Callable
    mean: float = np.nan
    lorenz: Optional[Callable] = None
    name: str = "continuous"

    def sf(self, y):
        return 1.0 - self.cdf(y)

    def scaled(self, a: float) -> "ContinuousDistribution":
        lorenz = self.lorenz
        return ContinuousDistribution(
            quantile=lambda u: a * self.quantile(u),
            cdf=lambda y: self.cdf(np.asarray(y) / a),
            mean=a * self.mean, lorenz=lorenz, name=f"{a:g}*{self.name}")


def pareto_distribution(delta: float, lam: float = 1.0) -> ContinuousDistribution:
    """Pareto law ``F(y) = 1 - (lam/y)**(1/delta)`` for ``y >= lam``."""
    if delta <= 0 or lam <= 0:
        raise ValidationError("Pareto requires delta > 0 and lam > 0")

    def quantile(u):
        return lam * np.exp(-delta * np.log1p(-np.asarray(u, dtype=float)))

    def cdf(y):
        y = np.asarray(y, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = -np.expm1(np.log(lam / y) / delta)
        return np.where(y >= lam, out, 0.0)

    lorenz = None
    mean = np.inf
    if delta < 1:
        mean = lam / (1 - delta)

        def lorenz(u):
            return -np.expm1((1 - delta) * np.log1p(-np.asarray(u, dtype=float)))

    return ContinuousDistribution(quantile, cdf, mean, lorenz, f"pareto({delta:g}, {lam:g})")


def lognormal_distribution(sigma: float, mu: float = 0.0) -> ContinuousDistribution:
    """Law of ``exp(mu + sigma * N(0, 1))``."""
    if sigma < 0:
        raise ValidationError("log-normal requires sigma >= 0")

    def quantile(u):
        return np.exp(mu + sigma * normal_quantile(u))

    def cdf(y):
        y = np.asarray(y, dtype=float)
        with np.errstate(divide="ignore"):
            return normal_cdf((np.log(y) - mu) / sigma)

    def lorenz(u):
        return normal_cdf(normal_quantile(u) - sigma)

    return ContinuousDistribution(quantile, cdf, float(np.exp(mu + sigma**2 / 2)),
                                  lorenz, f"lognormal({sigma:g}, {mu:g})")


def uniform_distribution(b: float = 1.0) -> ContinuousDistribution:
    if b <= 0:
        raise ValidationError("uniform requires b > 0")
    return ContinuousDistribution(
        quantile=lambda u: b * np.asarray(u, dtype=float),
        cdf=lambda y: np.clip(np.asarray(y, dtype=float) / b, 0.0, 1.0),
        mean=b / 2, lorenz=lambda u: np.asarray(u, dtype=float) ** 2,
        name=f"uniform(0, {b:g})")


def exponential_distribution(scale: float = 1.0) -> ContinuousDistribution:
    return ContinuousDistribution(
        quantile=lambda u: -scale * np.log1p(-np.asarray(u, dtype=float)),
        cdf=lambda y: -np.expm1(-np.maximum(np.asarray(y, dtype=float), 0) / scale),
        mean=scale,
        lorenz=lambda u: (lambda v: v + (1 - v) * np.log1p(-v))(np.asarray(u, dtype=float)),
        name=f"exponential({scale:g})")


@dataclass(frozen=True)
class CurveGrid:
    u: np.ndarray
    v: np.ndarray


@dataclass(frozen=True)
class CurveSet:
    """Lorenz, Bonferroni, C and D curves evaluated on a common grid."""

    L: CurveGrid
    B: CurveGrid
    C: CurveGrid
    D: CurveGrid

    @classmethod
    def from_values(cls, u, L, B, C, D) -> "CurveSet":
        return cls(CurveGrid(u, L), CurveGrid(u, B), CurveGrid(u, C), CurveGrid(u, D))

    @property
    def u(self) -> np.ndarray:
        return self.L.u

    def table(self) -> np.ndarray:
        """Columns ``u, L, B, C, D``."""
        return np.column_stack([self.u, self.L.v, self.B.v, self.C.v, self.D.v])


@dataclass(frozen=True)
class IndexSet:
    gini: float
    bonferroni: float
    c_index: float
    d_index: float

    def as_dict(self) -> dict:
        return {"gini": self.gini, "bonferroni": self.bonferroni,
                "c_index": self.c_index, "d_index": self.d_index}


Distribution = Union[Sample, StepDistribution, ContinuousDistribution, np.ndarray]


def as_step_distribution(dist) -> StepDistribution:
    if isinstance(dist, StepDistribution):
        return dist
    if isinstance(dist, Sample):
        return StepDistribution.empirical(dist.y)
    y = np.asarray(dist, dtype=float)
    if y.size == 0:
        raise ValidationError("no data rows")
    return StepDistribution.empirical(y)


def quantile(dist, u):
    """Left-inverse quantile of a step or continuous distribution."""
    if isinstance(dist, ContinuousDistribution):
        return dist.quantile(u)
    return as_step_distribution(dist).quantile(u)


def _validated_step(dist) -> StepDistribution:
    step = as_step_distribution(dist)
    if step.support[0] <= 0:
        raise ValidationError("support values must be strictly positive")
    if abs(step.total_mass - 1.0) > _MASS_TOL:
        raise ValidationError("distribution mass must be 1 for inequality curves")
    if not np.isfinite(step.mean) or step.mean <= 0:
        raise ValidationError("distribution needs a positive finite mean")
    return step


def _step_partial_integrals(step: StepDistribution, u: np.ndarray):
    """Exact integral of the step quantile over (0, u) and the quantile at u."""
    s, c = step.support, step.cdf
    area = np.cumsum(step.masses * s)
    idx = np.minimum(np.searchsorted(c, u, side="left"), s.size - 1)
    prev_c = np.where(idx > 0, c[idx - 1], 0.0)
    prev_area = np.where(idx > 0, area[idx - 1], 0.0)
    q = s[idx]
    return prev_area + (u - prev_c) * q, q, float(area[-1])


def _continuous_mean(dist: ContinuousDistribution) -> float:
    mu = dist.mean
    if not np.isfinite(mu):
        mu = simpson_integrate(lambda t: dist.quantile(np.clip(t, 1e-15, 1 - 1e-15)), 0.0, 1.0)
    if not np.isfinite(mu) or mu <= 0:
        raise ValidationError("distribution needs a positive finite mean")
    return mu


def _continuous_lorenz(dist: ContinuousDistribution, mu: float) -> Callable:
    if dist.lorenz is not None:
        return dist.lorenz

    def lorenz(u):
        u = np.atleast_1d(np.asarray(u, dtype=float))
        q = lambda t: dist.quantile(np.clip(t, 1e-15, 1 - 1e-15))
        return np.array([simpson_integrate(q, 0.0, ui) for ui in u]) / mu

    return lorenz


def inequality_curves(dist: Distribution, grid=None) -> CurveSet:
    """Lorenz, Bonferroni, C and D curves on ``grid`` (default 999 points).

    For samples and step distributions ``L(u)`` integrates the step quantile
    exactly; ``C`` and ``D`` use the left-inverse quantile at ``u``.
    """
    u = default_grid() if grid is None else _check_grid(grid)
    if isinstance(dist, ContinuousDistribution):
        mu = _continuous_mean(dist)
        L = np.asarray(_continuous_lorenz(dist, mu)(u), dtype=float)
        q = np.asarray(dist.quantile(u), dtype=float)
        if np.any(q <= 0):
            raise ValidationError("quantile values must be strictly positive")
        C = mu * L / q
    else:
        step = _validated_step(dist)
        partial, q, mu = _step_partial_integrals(step, u)
        L = partial / mu
        C = partial / q
    return CurveSet.from_values(u, L, L / u, C, C / u)


def _step_indices(step: StepDistribution) -> IndexSet:
    s, c = step.support, step.cdf
    p = step.masses
    c_prev = np.concatenate([[0.0], c[:-1]])
    mu = float(p @ s)
    area = np.cumsum(p * s)
    area_prev = np.concatenate([[0.0], area[:-1]])

    # int_0^1 L = int_0^1 (1 - t) Q(t) dt / mu
    int_l = float(np.sum(s * (p - (c**2 - c_prev**2) / 2))) / mu

    # int_0^1 L(u)/u du = int_0^1 Q(t) (-log t) dt / mu
    def t_log_t(t):
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(t > 0, t * np.log(t), 0.0)

    int_b = float(np.sum(s * (p - t_log_t(c) + t_log_t(c_prev)))) / mu

    # C(u) = (area_prev + (u - c_prev) s) / s on each atom's segment
    int_c = float(np.sum(area_prev * p / s + p**2 / 2))

    with np.errstate(divide="ignore", invalid="ignore"):
        log_ratio = np.where(c_prev > 0, np.log(c / np.where(c_prev > 0, c_prev, 1.0)), 0.0)
    int_d = float(np.sum((area_prev / s - c_prev) * log_ratio + p))

    return IndexSet(gini=1 - 2 * int_l, bonferroni=1 - int_b,
                    c_index=1 - 2 * int_c, d_index=1 - int_d)


def _continuous_indices(dist: ContinuousDistribution, tol: float) -> IndexSet:
    mu = _continuous_mean(dist)
    lorenz = _continuous_lorenz(dist, mu)
    lo, hi = 1e-15, 1 - 1e-15

    def parts(u):
        u = np.clip(u, lo, hi)
        L = np.asarray(lorenz(u), dtype=float)
        C = mu * L / np.asarray(dist.quantile(u), dtype=float)
        return u, L, C

    def gini_f(u):
        u, L, _ = parts(u)
        return u - L

    def bonf_f(u):
        u, L, _ = parts(u)
        return 1 - L / u

    def c_f(u):
        u, _, C = parts(u)
        return u - C

    def d_f(u):
        u, _, C = parts(u)
        return 1 - C / u

    return IndexSet(
        gini=2 * simpson_integrate(gini_f, 0.0, 1.0, tol),
        bonferroni=simpson_integrate(bonf_f, 0.0, 1.0, tol),
        c_index=2 * simpson_integrate(c_f, 0.0, 1.0, tol),
        d_index=simpson_integrate(d_f, 0.0, 1.0, tol))


def _grid_indices(curves: CurveSet) -> IndexSet:
    # Composite Simpson over the grid; the end pieces (0, u_1) and (u_m, 1)
    # use the rectangle rule with the nearest grid value.
    from scipy.integrate import simpson

    u = curves.u

    def integral(values):
        inner = simpson(values, x=u) if u.size > 2 else np.trapz(values, u)
        return float(inner + values[0] * u[0] + values[-1] * (1 - u[-1]))

    return IndexSet(
        gini=2 * integral(u - curves.L.v),
        bonferroni=integral(1 - curves.B.v),
        c_index=2 * integral(u - curves.C.v),
        d_index=integral(1 - curves.D.v))


def inequality_indices(obj, tol: float = 1e-9) -> IndexSet:
    """Gini, Bonferroni, C and D indices.

    Samples and step distributions are integrated exactly piece by piece;
    continuous distributions by adaptive Simpson to ``tol``; a precomputed
    :class:`CurveSet` by composite Simpson over its own grid (accuracy then
    depends on the grid density).
    """
    if isinstance(obj, CurveSet):
        return _grid_indices(obj)
    if isinstance(obj, ContinuousDistribution):
        return _continuous_indices(obj, tol)
    return _step_indices(_validated_step(obj))
