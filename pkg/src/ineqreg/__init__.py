"""Covariate-dependent inequality: curves, orderings and regression models."""

__version__ = "0.1.0"

from .curves import (CurveGrid, CurveSet, ContinuousDistribution, IndexSet,
                     Sample, StepDistribution, default_grid,
                     exponential_distribution, inequality_curves,
                     inequality_indices, lognormal_distribution,
                     pareto_distribution, quantile, uniform_distribution)
from .exceptions import (ConvergenceWarning, NumericalWarning, TiesError,
                         ValidationError)
from .orderings import (OrderingReport, e_order_check, r_order_check,
                        star_order_check)
from .parametric import (DeltaLink, LognormalFit, ParetoFit, conditional_delta,
                         lognormal_conditional_curves,
                         lognormal_conditional_lorenz, lognormal_fit,
                         pareto_conditional_curves, pareto_fit, pareto_lorenz)
from .semiparametric import (GENERALIZED_PARETO, LEHMANN, SemiparametricFit,
                             breslow_baseline, conditional_curves,
                             conditional_distribution, conditional_indices,
                             conditional_mu, conditional_quantile, cox_fit,
                             lehmann_fit, partial_loglik)
from .simulation import (CoxSpec, LognormalSpec, ParetoSpec, binary_design,
                         monte_carlo_study, simulate)

__all__ = [
    "CurveGrid", "CurveSet", "ContinuousDistribution", "IndexSet", "Sample",
    "StepDistribution", "default_grid", "exponential_distribution",
    "inequality_curves", "inequality_indices", "lognormal_distribution",
    "pareto_distribution", "quantile", "uniform_distribution",
    "ConvergenceWarning", "NumericalWarning", "TiesError", "ValidationError",
    "OrderingReport", "e_order_check", "r_order_check", "star_order_check",
    "DeltaLink", "LognormalFit", "ParetoFit", "conditional_delta",
    "lognormal_conditional_curves", "lognormal_conditional_lorenz",
    "lognormal_fit", "pareto_conditional_curves", "pareto_fit",
    "pareto_lorenz", "GENERALIZED_PARETO", "LEHMANN", "SemiparametricFit",
    "breslow_baseline", "conditional_curves", "conditional_distribution",
    "conditional_indices", "conditional_mu", "conditional_quantile", "cox_fit",
    "lehmann_fit", "partial_loglik", "CoxSpec", "LognormalSpec", "ParetoSpec",
    "binary_design", "monte_carlo_study", "simulate",
]
