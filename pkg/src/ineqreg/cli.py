"""Command-line interface.

Every command writes a JSON report with the same top-level fields (see
``REPORT_FIELDS``); commands that produce curves also write ``u,L,B,C,D``
CSV grids. Exit status is 0 on success, 2 on invalid input and 3 when a fit
fails to converge.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
import warnings
from pathlib import Path

import numpy as np

from . import __version__
from .curves import (DEFAULT_GRID_POINTS, CurveSet, Sample, default_grid,
                     exponential_distribution, inequality_curves,
                     inequality_indices, lognormal_distribution,
                     pareto_distribution)
from .exceptions import ValidationError
from .orderings import e_order_check, r_order_check, star_order_check
from .parametric import (conditional_delta, lognormal_conditional_curves,
                         lognormal_fit, pareto_conditional_curves, pareto_fit)
from .semiparametric import (GENERALIZED_PARETO, LEHMANN, conditional_curves,
                             conditional_distribution, cox_fit)
from .simulation import (CoxSpec, LognormalSpec, ParetoSpec, binary_design,
                         monte_carlo_study, simulate)

EXIT_OK, EXIT_VALIDATION, EXIT_CONVERGENCE = 0, 2, 3

REPORT_FIELDS = ("command", "model", "n", "converged", "loglik", "coefficients",
                 "nuisance", "indices", "orderings", "monte_carlo", "messages")


class ConvergenceFailure(Exception):
    pass


def new_report(command: str, model=None) -> dict:
    report = dict.fromkeys(REPORT_FIELDS)
    report.update(command=command, model=model, messages=[])
    return report


def _clean(obj):
    # JSON has no NaN/inf; map them to null
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        return float(obj) if math.isfinite(obj) else None
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


# -- input -------------------------------------------------------------------

def _split_names(text) -> list:
    if not text:
        return []
    return [c.strip() for c in text.split(",") if c.strip()]


def ingest(path, response: str, covariates=(), require_distinct: bool = False) -> Sample:
    """Read a header-first CSV into a :class:`Sample` with an intercept column.

    Rows are numbered from 1 after the header in error messages.
    """
    covariates = list(covariates)
    if response in covariates:
        raise ValidationError("response column must differ from covariate columns")
    try:
        handle = open(path, newline="")
    except OSError as exc:
        raise ValidationError(f"cannot read {path}: {exc.strerror}") from None
    with handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        if header is None:
            raise ValidationError("no data rows")
        header = [h.strip() for h in header]
        missing = [c for c in [response, *covariates] if c not in header]
        if missing:
            raise ValidationError(f"missing columns: {', '.join(missing)}")
        cols = [header.index(c) for c in [response, *covariates]]
        rows = []
        for lineno, row in enumerate(reader, start=1):
            if not row or all(not cell.strip() for cell in row):
                continue
            values = []
            for name, j in zip([response, *covariates], cols):
                cell = row[j].strip() if j < len(row) else ""
                try:
                    values.append(float(cell))
                except ValueError:
                    raise ValidationError(
                        f"non-numeric value {cell!r} in row {lineno}, column {name!r}") from None
            rows.append(values)
    if not rows:
        raise ValidationError("no data rows")
    data = np.array(rows, dtype=float)
    y = data[:, 0]
    bad = np.flatnonzero(~(y > 0))
    if bad.size:
        raise ValidationError("response must be positive; offending rows: "
                              + ", ".join(str(i + 1) for i in bad))
    if require_distinct and np.unique(y).size != y.size:
        raise ValidationError("ties unsupported: rank-based fits need distinct responses")
    return Sample.from_arrays(y, data[:, 1:], names=covariates)


def write_sample(path, sample: Sample, response: str = "y"):
    names = list(sample.names) or [f"x{j}" for j in range(1, sample.d + 1)]
    with open(path, "w", newline="") as handle:
        w = csv.writer(handle)
        w.writerow([response, *names])
        for yi, xi in zip(sample.y, sample.covariates):
            w.writerow([repr(float(yi)), *(repr(float(v)) for v in xi)])


def write_curves(path, curves: CurveSet):
    with open(path, "w", newline="") as handle:
        w = csv.writer(handle)
        w.writerow(["u", "L", "B", "C", "D"])
        for row in curves.table():
            w.writerow([repr(float(v)) for v in row])


def _parse_at(specs, names) -> list:
    """``--at educ=12,exp=3`` -> list of (label dict, full covariate row)."""
    out = []
    for spec in specs or []:
        given = {}
        for part in _split_names(spec):
            if "=" not in part:
                raise ValidationError(f"--at expects name=value pairs, got {part!r}")
            k, v = part.split("=", 1)
            try:
                given[k.strip()] = float(v)
            except ValueError:
                raise ValidationError(f"--at value for {k!r} is not numeric") from None
        unknown = set(given) - set(names)
        if unknown:
            raise ValidationError(f"--at names unknown covariates: {', '.join(sorted(unknown))}")
        absent = [n for n in names if n not in given]
        if absent:
            raise ValidationError(f"--at must set every covariate; missing {', '.join(absent)}")
        out.append((given, np.array([1.0] + [given[n] for n in names])))
    return out


def _parse_floats(text, what) -> list:
    try:
        return [float(v) for v in _split_names(text)]
    except ValueError:
        raise ValidationError(f"{what} must be comma-separated numbers") from None


def _curve_paths(base, count):
    if base is None:
        return [None] * count
    if count == 1:
        return [Path(base)]
    p = Path(base)
    return [p.with_name(f"{p.stem}_{i + 1}{p.suffix}") for i in range(count)]


# -- fitting helpers -----------------------------------------------------------

def _coef_names(sample: Sample):
    return ["intercept", *sample.names]


def _fit(model: str, sample: Sample, tol):
    kwargs = {} if tol is None else {"tol": tol}
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        if model == "pareto":
            return pareto_fit(sample, **kwargs)
        if model == "lognormal":
            return lognormal_fit(sample, **kwargs)
        kind = LEHMANN if model == "lehmann" else GENERALIZED_PARETO
        return cox_fit(sample, kind, **kwargs)


def _fill_fit(report, model, sample, fit):
    names = _coef_names(sample)
    report["n"] = sample.n
    report["converged"] = bool(fit.converged)
    if model == "lognormal":
        report["coefficients"] = [{"name": "alpha", "estimate": fit.alpha_hat, "se": fit.se[0]}]
        report["coefficients"] += [{"name": n, "estimate": b, "se": s}
                                   for n, b, s in zip(names, fit.beta_hat.beta, fit.se[1:-1])]
        report["nuisance"] = {"sigma0": fit.sigma0_hat, "sigma0_se": fit.se[-1]}
        report["loglik"] = fit.loglik
    elif model == "pareto":
        report["coefficients"] = [{"name": n, "estimate": b, "se": s}
                                  for n, b, s in zip(names, fit.beta_hat.beta, fit.se)]
        report["nuisance"] = {"lambda": fit.lambda_hat}
        report["loglik"] = fit.loglik
    else:
        report["coefficients"] = [{"name": n, "estimate": b, "se": s}
                                  for n, b, s in zip(names[1:], fit.beta_hat.beta[1:], fit.se[1:])]
        report["nuisance"] = {"kind": fit.model_kind, "baseline_points": int(fit.baseline.support.size)}
        report["loglik"] = fit.partial_loglik
        report["messages"].append("intercept absorbed into the baseline distribution")
    if not fit.converged:
        report["messages"].append(f"fit did not converge: {fit.report.message}")


def _conditional(model, fit, row, grid, method):
    """Curves and indices at one covariate row."""
    if model == "pareto":
        return pareto_conditional_curves(conditional_delta(fit, row), grid)
    if model == "lognormal":
        return lognormal_conditional_curves(fit.sigma0_hat, conditional_delta(fit, row), grid)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        if model == "lehmann" or method == "exact":
            dist = conditional_distribution(fit, row)
            return inequality_curves(dist, grid), inequality_indices(dist)
        curves = conditional_curves(fit, row, grid, method)
        fine = conditional_curves(fit, row, default_grid(9999), method)
        return curves, inequality_indices(fine)


def _indices_at(report, model, fit, sample, args, grid):
    report["indices"] = []
    ats = _parse_at(args.at, list(sample.names))
    paths = _curve_paths(getattr(args, "curves_output", None), len(ats))
    for (label, row), path in zip(ats, paths):
        entry = {"at": label, "delta": float(fit.beta_hat(row))}
        try:
            curves, idx = _conditional(model, fit, row, grid, args.method)
        except ValidationError as exc:
            if args.command == "curves":
                raise
            report["messages"].append(f"at {label}: {exc}")
            entry.update(dict.fromkeys(("gini", "bonferroni", "c_index", "d_index")))
        else:
            entry.update(idx.as_dict())
            if path is not None:
                write_curves(path, curves)
        report["indices"].append(entry)


# -- commands -------------------------------------------------------------------

def cmd_curves(args) -> dict:
    grid = default_grid(args.grid_points)
    if args.conditional:
        model = args.model
        sample = ingest(args.input, args.response, _split_names(args.covariates),
                        require_distinct=model in ("cox", "lehmann"))
        if not args.at:
            raise ValidationError("--conditional needs at least one --at")
        fit = _fit(model, sample, args.tol)
        report = new_report("curves", model)
        _fill_fit(report, model, sample, fit)
        _indices_at(report, model, fit, sample, args, grid)
        if not fit.converged:
            raise ConvergenceFailure(report)
        return report
    sample = ingest(args.input, args.response)
    report = new_report("curves", "empirical")
    report["n"] = sample.n
    report["indices"] = [{"at": None, "delta": None, **inequality_indices(sample).as_dict()}]
    if args.curves_output:
        write_curves(args.curves_output, inequality_curves(sample, grid))
    return report


def _fit_command(model):
    def run(args) -> dict:
        sample = ingest(args.input, args.response, _split_names(args.covariates),
                        require_distinct=model in ("cox", "lehmann"))
        fit = _fit(model, sample, args.tol)
        report = new_report(args.command, model)
        _fill_fit(report, model, sample, fit)
        _indices_at(report, model, fit, sample, args, default_grid(args.grid_points))
        if not fit.converged:
            raise ConvergenceFailure(report)
        return report
    return run


def cmd_order_check(args) -> dict:
    f = ingest(args.input, args.response).y
    h = ingest(args.other, args.other_response or args.response).y
    grid = default_grid(args.grid_points)
    lo, hi = args.trim
    grid = grid[(grid >= lo) & (grid <= hi)]
    checks = {"star": star_order_check, "e": e_order_check, "r": r_order_check}
    wanted = list(checks) if args.order == "all" else [args.order]
    report = new_report("order-check")
    report["n"] = [int(f.size), int(h.size)]
    report["orderings"] = {}
    for name in wanted:
        rep = checks[name](f, h, grid, args.tol)
        report["orderings"][name] = {"holds": rep.holds, "max_violation": rep.max_violation,
                                     "witness_u": rep.witness_u, "tolerance": rep.tolerance,
                                     "relation": rep.relation}
    return report


def _baseline(text):
    family, _, params = (text or "pareto:1").partition(":")
    values = _parse_floats(params, "--baseline parameters")
    if family == "pareto":
        return pareto_distribution(*(values or [1.0]))
    if family == "exponential":
        return exponential_distribution(*(values or [1.0]))
    if family == "lognormal":
        return lognormal_distribution(*(values or [1.0]))
    raise ValidationError(f"unknown baseline family {family!r}")


def _spec(args):
    beta = _parse_floats(args.beta, "--beta")
    if not beta:
        raise ValidationError("--beta needs at least the intercept")
    if args.model == "pareto":
        return ParetoSpec(args.lam, tuple(beta))
    if args.model == "lognormal":
        return LognormalSpec(args.alpha, tuple(beta), args.sigma0)
    return CoxSpec(_baseline(args.baseline), tuple(beta))


def _design(args):
    return binary_design() if args.design == "binary" else None


def cmd_simulate(args) -> dict:
    spec = _spec(args)
    sample = simulate(spec, args.n, args.seed, _design(args))
    if args.data_output is None:
        raise ValidationError("simulate needs --data-output for the CSV sample")
    write_sample(args.data_output, sample)
    report = new_report("simulate", args.model)
    report["n"] = sample.n
    report["messages"].append(f"sample written to {args.data_output}")
    return report


def cmd_mc_study(args) -> dict:
    spec = _spec(args)
    fitter = {"pareto": pareto_fit, "lognormal": lognormal_fit,
              "cox": lambda s: cox_fit(s, GENERALIZED_PARETO)}[args.model]

    def quiet(sample):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            return fitter(sample)

    summary = monte_carlo_study(spec, quiet, args.n, args.reps, args.seed, _design(args),
                                args.level)
    report = new_report("mc-study", args.model)
    report["n"] = args.n
    report["converged"] = summary["converged"] == summary["reps"]
    report["monte_carlo"] = summary
    return report


# -- parser -----------------------------------------------------------------------

def _common(p, covariates=True):
    p.add_argument("--input", required=True, help="CSV file with a header row")
    p.add_argument("--response", required=True, help="response column")
    if covariates:
        p.add_argument("--covariates", default="", help="comma-separated covariate columns")
    p.add_argument("--output", help="JSON report path (default: stdout)")
    p.add_argument("--grid-points", type=int, default=DEFAULT_GRID_POINTS)
    p.add_argument("--tol", type=float, default=None)


def _conditional_opts(p):
    p.add_argument("--at", action="append", metavar="NAME=VALUE,...",
                   help="covariate values for conditional curves (repeatable)")
    p.add_argument("--curves-output", help="CSV path for u,L,B,C,D grids")
    p.add_argument("--method", choices=("plugin", "exact"), default="plugin",
                   help="conditional mean estimator for rank-based fits")


def _sim_opts(p):
    p.add_argument("--model", choices=("pareto", "lognormal", "cox"), default="pareto")
    p.add_argument("--n", type=int, default=2000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--beta", default="-0.6931471805599453,0.3,-0.2",
                   help="coefficients, intercept first")
    p.add_argument("--lam", type=float, default=1.0)
    p.add_argument("--alpha", type=float, default=0.5)
    p.add_argument("--sigma0", type=float, default=0.5)
    p.add_argument("--baseline", default="pareto:1",
                   help="cox baseline: pareto:delta[,lam] | exponential:scale | lognormal:sigma[,mu]")
    p.add_argument("--design", choices=("normal", "binary"), default="normal")
    p.add_argument("--output", help="JSON report path (default: stdout)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ineqreg", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("curves", help="empirical or conditional inequality curves")
    _common(p)
    _conditional_opts(p)
    p.add_argument("--conditional", action="store_true")
    p.add_argument("--model", choices=("cox", "lehmann", "pareto", "lognormal"), default="cox")
    p.set_defaults(func=cmd_curves)

    p = sub.add_parser("order-check", help="star, e- and r-order diagnostics")
    _common(p, covariates=False)
    p.add_argument("--other", required=True, help="CSV with the second sample")
    p.add_argument("--other-response", help="response column in --other")
    p.add_argument("--order", choices=("star", "e", "r", "all"), default="all")
    p.add_argument("--trim", type=float, nargs=2, default=(0.01, 0.99), metavar=("LO", "HI"))
    p.set_defaults(func=cmd_order_check)

    for name, model in (("fit-pareto", "pareto"), ("fit-lognormal", "lognormal"),
                        ("fit-cox", "cox"), ("fit-lehmann", "lehmann")):
        p = sub.add_parser(name, help=f"fit the {model} regression model")
        _common(p)
        _conditional_opts(p)
        p.set_defaults(func=_fit_command(model))

    p = sub.add_parser("simulate", help="draw a sample from a model")
    _sim_opts(p)
    p.add_argument("--data-output", help="CSV path for the simulated sample")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("mc-study", help="Monte Carlo bias/SD/coverage study")
    _sim_opts(p)
    p.add_argument("--reps", type=int, default=200)
    p.add_argument("--level", type=float, default=0.95)
    p.set_defaults(func=cmd_mc_study)
    return parser


def _emit(report, path):
    text = json.dumps(_clean(report), indent=2)
    if path:
        Path(path).write_text(text + "\n")
    else:
        print(text)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        report = args.func(args)
    except ConvergenceFailure as exc:
        _emit(exc.args[0], args.output)
        return EXIT_CONVERGENCE
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    _emit(report, args.output)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
