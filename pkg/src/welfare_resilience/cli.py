"""Command-line front end.

    welfare-resilience profile --input panel.csv --output-dir out/
    welfare-resilience simulate --beta1 -0.5 --g 10 --sigma 50 --n 200 --reps 300 --seed 7

Exit status: 0 on success, 1 on input errors, 2 on analysis failures
(with ``--strict``, any failing unit counts). Output files are written only
once every table has been computed.
"""

import argparse
import csv
import functools
import logging
import math
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import __version__
from .arma import ArmaParams, ArmaSpec, simulate
from .config import AnalysisConfig
from .crosssection import PROPERTIES, PanelTable, ols_hc0, property_matrix, rank, yearly_stats
from .exceptions import (
    DuplicateObservation,
    InvalidInput,
    NonContiguousSeries,
    ParseError,
    ResilienceError,
)
from .io import ingest, read_covariates, to_csv, to_json, write_atomic
from .resilience import classify, profile

log = logging.getLogger("welfare_resilience")

PROFILE_COLUMNS = (
    "unit", "n", "level", "g", "se_g", "trend_category", "sigma", "rho", "pi", "p", "q",
    "aic", "ljung_box_p", "adf_levels_decision_5pct", "adf_increments_decision_5pct",
    "resilient", "resistant", "warnings", "error",
)
CLASSIFY_COLUMNS = (
    "unit", "trend_category", "pi", "rho", "non_deteriorating", "anti_persistent",
    "not_volatile", "resilient", "resistant", "error",
)
RANK_COLUMNS = ("property", "direction", "position", "unit", "value", "stars")
YEARLY_COLUMNS = ("year", "n", "mean", "sd", "skewness", "kurtosis")
MATRIX_COLUMNS = ("row", "column", "spearman", "p_value", "n_used", "n_excluded")
REGRESS_COLUMNS = (
    "dependent", "term", "coefficient", "hc0_se", "p_value", "stars", "r_squared", "n_used", "cov_type",
)

# column in the profile table for each panel property
_PROFILE_FIELD = {"level": "level", "trend": "g", "rho": "rho", "pi": "pi"}


class UsageError(Exception):
    pass


class AnalysisFailure(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _window(text):
    try:
        unit, span = text.rsplit("=", 1)
        lo, hi = span.split(":")
        return unit, (int(lo) if lo else None, int(hi) if hi else None)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected UNIT=FROM:TO, got {text!r}") from None


def build_parser():
    common = _Parser(add_help=False)
    common.add_argument("--input", help="panel CSV with header unit,time,value")
    common.add_argument("--aliases", help="alias CSV with header source_unit,target_unit,time_from,time_to")
    common.add_argument("--covariates", help="covariate CSV with header unit,name,value")
    common.add_argument("--output-dir", default=".", help="directory for result tables")
    common.add_argument("--max-p", type=int, default=2)
    common.add_argument("--max-q", type=int, default=2)
    common.add_argument("--alpha", type=float, default=0.05, help="trend significance level")
    common.add_argument("--lb-lags", type=int, default=None, help="Ljung-Box lags (default min(10, n/5))")
    common.add_argument("--window", action="append", type=_window, default=[], metavar="UNIT=FROM:TO",
                        help="restrict a unit's fitted range (repeatable)")
    common.add_argument("--interpolate", action="store_true", help="bridge gaps of up to 2 periods")
    common.add_argument("--aicc", action="store_true", help="select orders by AICc instead of AIC")
    common.add_argument("--adf-variant", choices=("tau", "joint_f"), default="tau")
    common.add_argument("--trend-rule", choices=("significance", "sign"), default="significance")
    common.add_argument("--no-screen", action="store_true",
                        help="do not drop near-unit-root or redundant candidates in order selection")
    common.add_argument("--strict", action="store_true", help="fail (exit 2) if any unit fails")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--jobs", type=int, default=1)
    common.add_argument("--json", action="store_true", help="also write a JSON mirror of each table")
    common.add_argument("--profiles", help="reuse a profiles.csv instead of re-fitting (rank, matrix, regress)")

    parser = _Parser(prog="welfare-resilience", description="Resilience and resistance of welfare time series.")
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sub.add_parser("profile", parents=[common], help="fit every unit and write profiles.csv")
    sub.add_parser("classify", parents=[common], help="write classification.csv")

    p = sub.add_parser("rank", parents=[common], help="best/worst performers by one property")
    p.add_argument("--property", choices=PROPERTIES, required=True)
    p.add_argument("--direction", choices=("asc", "desc"), default=None)
    p.add_argument("--top", type=int, default=10)
    p.add_argument("--ends", choices=("both", "top", "bottom"), default="both")

    p = sub.add_parser("yearly-stats", parents=[common], help="cross-sectional moments per year")
    p.add_argument("--from", dest="year_from", type=int, default=None)
    p.add_argument("--to", dest="year_to", type=int, default=None)

    p = sub.add_parser("matrix", parents=[common], help="Spearman matrix of the four properties")
    p.add_argument("--permutations", type=int, default=1000)

    p = sub.add_parser("regress", parents=[common], help="cross-sectional OLS with Huber-White errors")
    p.add_argument("--regressors", default=None, help="comma-separated covariate names (default: all)")
    p.add_argument("--dependent", default=",".join(PROPERTIES), help="comma-separated subset of level,trend,rho,pi")
    p.add_argument("--units", default=None, help="comma-separated unit filter")
    p.add_argument("--hc1", action="store_true", help="use the HC1 small-sample correction")

    p = sub.add_parser("simulate", parents=[common], help="write a synthetic ARIMA(p,1,q) panel")
    p.add_argument("--beta1", type=float, default=0.0)
    p.add_argument("--beta2", type=float, default=None)
    p.add_argument("--theta1", type=float, default=None)
    p.add_argument("--theta2", type=float, default=None)
    p.add_argument("--g", type=float, default=10.0)
    p.add_argument("--sigma", type=float, default=50.0)
    p.add_argument("--n", type=int, default=200, help="levels per realization")
    p.add_argument("--reps", type=int, default=1)
    p.add_argument("--k0", type=float, default=2000.0, help="initial level")
    p.add_argument("--start-time", type=int, default=1)
    return parser


def _config(args):
    return AnalysisConfig(
        max_p=args.max_p,
        max_q=args.max_q,
        alpha_trend=args.alpha,
        ljung_box_lags=args.lb_lags,
        sample_windows=dict(args.window),
        interpolation=args.interpolate,
        aic_variant="aicc" if args.aicc else "aic",
        adf_variant=args.adf_variant,
        trend_rule=args.trend_rule,
        screen=not args.no_screen,
        random_seed=args.seed,
    )


def _load(args):
    if not args.input:
        raise UsageError(f"{args.command}: --input is required")
    return ingest(args.input, args.aliases, args.covariates, interpolate=args.interpolate)


def _profile_unit(series, config):
    try:
        return profile(series, config), None
    except (ResilienceError, ValueError, ArithmeticError) as exc:
        return None, f"{type(exc).__name__}: {exc}"


def analyze(panel, config, jobs=1):
    """Profile every unit; returns ``[(unit, profile or None, error or None)]`` in unit order."""
    units = [u for u in panel.unit_ids if u in panel.series]
    worker = functools.partial(_profile_unit, config=config)
    series = [panel.series[u] for u in units]
    if jobs > 1 and len(series) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(worker, series, chunksize=max(1, len(series) // (4 * jobs))))
    else:
        results = [worker(s) for s in series]
    done = dict(zip(units, results))
    out = []
    for unit in panel.unit_ids:
        if unit in panel.invalid:
            out.append((unit, None, f"SeriesTooShort: {panel.invalid[unit]}"))
        else:
            prof, err = done[unit]
            out.append((unit, prof, err))
    return out


def _check_strict(results, strict):
    failed = [(u, e) for u, _, e in results if e]
    for unit, err in failed:
        log.warning("unit %s failed: %s", unit, err)
    if strict and failed:
        raise AnalysisFailure(f"{len(failed)} unit(s) failed; first: {failed[0][0]}: {failed[0][1]}")


def _adf_cell(result):
    if result is None:
        return ""
    return "reject" if result.rejects("5%") else "fail"


def profile_row(unit, prof, error=None):
    if prof is None:
        return {"unit": unit, "error": error or ""}
    c = classify(prof)
    return {
        "unit": unit,
        "n": prof.n_levels,
        "level": prof.level,
        "g": prof.trend_g,
        "se_g": prof.se_g,
        "trend_category": prof.trend_category,
        "sigma": prof.sigma,
        "rho": prof.rho,
        "pi": prof.pi,
        "p": prof.selected_spec.p,
        "q": prof.selected_spec.q,
        "aic": prof.fit.aic,
        "ljung_box_p": prof.ljung_box.p_value,
        "adf_levels_decision_5pct": _adf_cell(prof.adf_levels),
        "adf_increments_decision_5pct": _adf_cell(prof.adf_increments),
        "resilient": c.resilient,
        "resistant": c.resistant,
        "warnings": ";".join(prof.warnings),
        "error": "",
    }


def _classify_row(unit, prof, error=None):
    if prof is None:
        return {"unit": unit, "error": error or ""}
    c = classify(prof)
    return dict(
        unit=unit, trend_category=prof.trend_category, pi=prof.pi, rho=prof.rho,
        resilient=c.resilient, resistant=c.resistant, error="", **c.rationale,
    )


def _float_cell(text):
    return float(text) if text not in ("", "nan") else math.nan


def read_profiles(path, covariates=None):
    """Panel table from a ``profiles.csv`` written by the ``profile`` command."""
    rows = []
    with open(path, newline="", encoding="utf-8-sig") as fh:
        reader = csv.DictReader(fh)
        missing = {"unit", "level", "g", "rho", "pi", "ljung_box_p"} - set(reader.fieldnames or ())
        if missing:
            raise ParseError(f"missing columns {sorted(missing)}", path=path, line=1)
        for rec in reader:
            if rec.get("error"):
                continue
            try:
                rows.append((rec["unit"], *(_float_cell(rec[k]) for k in ("level", "g", "rho", "pi", "ljung_box_p"))))
            except ValueError as exc:
                raise ParseError(str(exc), path=path, line=reader.line_num) from None
    cols = list(zip(*rows)) if rows else [(), (), (), (), (), ()]
    return PanelTable(tuple(cols[0]), *(np.array(c, dtype=float) for c in cols[1:]), covariates=covariates or {})


def _panel_table(args, config):
    if args.profiles:
        covariates = read_covariates(args.covariates) if args.covariates else {}
        return read_profiles(args.profiles, covariates)
    panel = _load(args)
    results = analyze(panel, config, args.jobs)
    _check_strict(results, args.strict)
    return PanelTable.from_profiles([p for _, p, _ in results if p is not None], panel.covariates)


def cmd_profile(args, config):
    results = analyze(_load(args), config, args.jobs)
    _check_strict(results, args.strict)
    return {"profiles": (PROFILE_COLUMNS, [profile_row(*r) for r in results])}


def cmd_classify(args, config):
    results = analyze(_load(args), config, args.jobs)
    _check_strict(results, args.strict)
    return {"classification": (CLASSIFY_COLUMNS, [_classify_row(*r) for r in results])}


def cmd_rank(args, config):
    table = _panel_table(args, config)
    ranking = rank(table, args.property, args.direction, args.top, args.ends)
    for unit in ranking.excluded:
        log.info("unit %s excluded from %s ranking (infinite value)", unit, args.property)
    rows = [
        {"property": ranking.property, "direction": ranking.direction, "position": e.position,
         "unit": e.unit_id, "value": e.value, "stars": e.stars}
        for e in ranking.entries
    ]
    return {"ranking": (RANK_COLUMNS, rows)}


def cmd_yearly_stats(args, config):
    panel = _load(args)
    year_range = None
    if args.year_from is not None or args.year_to is not None:
        times = [t for s in panel.series.values() for t in (s.times[0], s.times[-1])]
        year_range = (
            args.year_from if args.year_from is not None else min(times),
            args.year_to if args.year_to is not None else max(times),
        )
    stats = yearly_stats(panel.series.values(), year_range)
    rows = [
        {"year": y, "n": d.n, "mean": d.mean, "sd": d.sd, "skewness": d.skewness, "kurtosis": d.excess_kurtosis}
        for y, d in stats.items()
    ]
    return {"yearly_stats": (YEARLY_COLUMNS, rows)}


def cmd_matrix(args, config):
    table = _panel_table(args, config)
    m = property_matrix(table, args.permutations, args.seed)
    rows = [
        {"row": a, "column": b, "spearman": m.coefficients[i, j], "p_value": m.p_values[i, j],
         "n_used": m.n_used, "n_excluded": len(m.excluded)}
        for i, a in enumerate(m.names)
        for j, b in enumerate(m.names)
    ]
    return {"matrix": (MATRIX_COLUMNS, rows)}


def cmd_regress(args, config):
    table = _panel_table(args, config)
    if args.units:
        table = table.subset(u.strip() for u in args.units.split(","))
    names = sorted({k for row in table.covariates.values() for k in row})
    if args.regressors:
        names = [r.strip() for r in args.regressors.split(",") if r.strip()]
    if not names:
        raise UsageError("regress: no covariates given (use --covariates)")
    X = np.column_stack([table.column(n) for n in names])
    rows = []
    for dep in (d.strip() for d in args.dependent.split(",")):
        if dep not in PROPERTIES:
            raise UsageError(f"regress: unknown dependent variable {dep!r}")
        y = table.column(dep)
        y = np.where(np.isfinite(y), y, np.nan)
        res = ols_hc0(y, X, names, cov_type="hc1" if args.hc1 else "hc0")
        for term, b, se, p, s in zip(res.names, res.coefficients, res.hc0_se, res.p_values, res.stars):
            rows.append({"dependent": dep, "term": term, "coefficient": b, "hc0_se": se, "p_value": p,
                         "stars": s, "r_squared": res.r_squared, "n_used": res.n_used,
                         "cov_type": res.cov_type})
    return {"regress": (REGRESS_COLUMNS, rows)}


def cmd_simulate(args, config):
    betas = tuple(b for b in (args.beta1, args.beta2) if b is not None)
    if args.beta2 is None and args.beta1 == 0.0:
        betas = ()
    thetas = tuple(t for t in (args.theta1, args.theta2) if t is not None)
    if args.n < 2 or args.reps < 1:
        raise UsageError("simulate: need --n >= 2 and --reps >= 1")
    spec = ArmaSpec(len(betas), len(thetas))
    try:
        params = ArmaParams(args.g, betas, thetas, args.sigma).validate(spec)
    except ResilienceError as exc:
        raise UsageError(f"simulate: {exc}") from None
    width = len(str(args.reps))
    rows = []
    for rep in range(args.reps):
        inc = simulate(params, spec, args.n - 1, [args.seed, rep]).values
        levels = np.r_[args.k0, args.k0 + np.cumsum(inc)]
        unit = f"sim{rep + 1:0{width}d}"
        rows.extend(
            {"unit": unit, "time": args.start_time + t, "value": float(v)} for t, v in enumerate(levels)
        )
    return {"panel": (("unit", "time", "value"), rows)}


COMMANDS = {
    "profile": cmd_profile,
    "classify": cmd_classify,
    "rank": cmd_rank,
    "yearly-stats": cmd_yearly_stats,
    "matrix": cmd_matrix,
    "regress": cmd_regress,
    "simulate": cmd_simulate,
}


def run(argv=None):
    """Parse ``argv``, run the command, write outputs; returns the exit status."""
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return 1
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        if args.jobs < 1:
            raise UsageError("--jobs must be at least 1")
        config = _config(args)
        tables = COMMANDS[args.command](args, config)
    except (UsageError, ParseError, InvalidInput, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except AnalysisFailure as exc:
        print(f"analysis failed: {exc}", file=sys.stderr)
        return 2
    except ResilienceError as exc:
        # ingestion errors are input errors; everything else is an analysis failure
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1 if isinstance(exc, (DuplicateObservation, NonContiguousSeries)) else 2

    files = {}
    for name, (columns, rows) in tables.items():
        files[f"{name}.csv"] = to_csv(columns, rows)
        if args.json:
            files[f"{name}.json"] = to_json(columns, rows)
    try:
        for path in write_atomic(args.output_dir, files):
            log.info("wrote %s", path)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
