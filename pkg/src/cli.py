"""
Rank dynamics command line

Commands:
    fit        fit rank-distribution models to one snapshot (or all) and score them
    dynamics   per-rank diversity, change probability, entropy, complexity, closure
    simulate   random-walk ranking model, optionally calibrated to a data file

JSON reports go to --out (stdout by default); logs go to stderr.
Exit codes: 0 ok, 2 input/validation, 3 fit failure, 4 too few snapshots.
"""

import argparse
import logging
import sys
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

from pydantic import BaseModel, ValidationError

from config import AnalysisConfig, LoggingSettings, as_dict, load_config
from core_data import (
    RankingSeries, parse_ranking_file, ranking_csv_text, select_snapshot,
    snapshot_scores, truncate_top_n,
)
from distributions import ModelId
from dynamics import compute_profile, diversity_from_matrix, fit_sigmoid
from errors import DegenerateCurve, InvalidParams, MissingScores, RankAnalysisError, TooFewSnapshots
from gof import score_fit, summarize_fits
from reports import ReportBundle, ReportValidationError, write_bundle, write_text
from walker import WalkConfig, calibrate_sigma, simulate

# SVG output needs matplotlib (requirements-optional.txt)
try:
    from plots import plot_calibration, plot_rank_distribution, plot_spaghetti, write_dynamics_figures
    PLOTS_AVAILABLE = True
except ImportError:
    PLOTS_AVAILABLE = False

logger = logging.getLogger(__name__)

LOG_FORMAT = "%(asctime)s [%(levelname)s] %(message)s"
LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR")


def setup_logging(settings: LoggingSettings) -> None:
    """Log to stderr (stdout carries reports) and optionally to a dated file"""
    handlers: List[logging.Handler] = [logging.StreamHandler(sys.stderr)]
    if settings.log_to_file:
        log_dir = Path(settings.log_dir)
        log_dir.mkdir(parents=True, exist_ok=True)
        log_file = log_dir / f"rank_dynamics_{datetime.now().strftime('%Y%m%d')}.log"
        handlers.append(logging.FileHandler(log_file, encoding="utf-8"))
    logging.basicConfig(
        level=getattr(logging, settings.level.upper(), logging.INFO),
        format=LOG_FORMAT,
        handlers=handlers,
        force=True,
    )


def parse_models(text: str) -> List[ModelId]:
    models = [ModelId.parse(name) for name in text.split(",") if name.strip()]
    if not models:
        raise InvalidParams("--models needs at least one of m1..m5")
    return list(dict.fromkeys(models))


def _override(model: BaseModel, **changes: Any) -> BaseModel:
    """Copy of a settings model with the non-None changes applied (validated)"""
    values = as_dict(model)
    values.update({key: value for key, value in changes.items() if value is not None})
    return type(model)(**values)


def _load_series(path: str, top: Optional[int]) -> RankingSeries:
    series = parse_ranking_file(path)
    if top is not None:
        series = truncate_top_n(series, top)
    return series


def _check_svg(args: argparse.Namespace) -> None:
    if args.svg and not PLOTS_AVAILABLE:
        raise InvalidParams("--svg needs matplotlib; install requirements-optional.txt")


# Commands

def cmd_fit(args: argparse.Namespace, config: AnalysisConfig) -> int:
    models = parse_models(args.models)
    series = _load_series(args.input, args.top)
    if not series.has_scores:
        raise MissingScores()
    bootstrap = _override(config.bootstrap, n_bootstrap=args.bootstrap,
                          sample_size=args.sample_size, seed=args.seed)

    if args.time == "all":
        selected = list(enumerate(series.snapshots))
    else:
        selected = [select_snapshot(series, args.time)]

    fits = []
    figure_data, figure_fits, figure_label = None, [], None
    for index, snapshot in selected:
        data = snapshot_scores(snapshot)
        logger.info(f"Fitting {len(models)} model(s) to snapshot {index} ('{snapshot.time_label}', {len(data)} ranks)")
        snapshot_fits = [
            score_fit(data, model, bootstrap=bootstrap, fitting=config.fitting,
                      workers=config.execution.workers, time_label=snapshot.time_label)
            for model in models
        ]
        fits.extend(snapshot_fits)
        # the figure shows the last snapshot selected
        figure_data, figure_fits, figure_label = data, snapshot_fits, snapshot.time_label

    metadata = {
        "command": "fit",
        "input": args.input,
        "N": series.N,
        "T": series.T,
        "seed": bootstrap.seed,
        "time": args.time,
        "top": args.top,
        "models": [m.value for m in models],
        "n_bootstrap": bootstrap.n_bootstrap,
        "sample_size": bootstrap.sample_size,
    }
    summary = summarize_fits(fits) if args.time == "all" else None
    write_bundle(ReportBundle.build(metadata, fits=fits, fit_summary=summary), args.out)

    if args.svg:
        plot_rank_distribution(figure_data, figure_fits, Path(args.svg) / "rank_distribution.svg",
                               config.plots, title=figure_label)
    return 0


def cmd_dynamics(args: argparse.Namespace, config: AnalysisConfig) -> int:
    series = _load_series(args.input, args.top)
    profile = compute_profile(series, config.fitting)

    metadata = {
        "command": "dynamics",
        "input": args.input,
        "N": profile.N,
        "T": profile.T,
        "seed": None,
        "top": args.top,
    }
    write_bundle(ReportBundle.build(metadata, dynamics=profile), args.out)

    if args.csv:
        write_text(profile.to_csv_text(), args.csv)
    if args.svg:
        write_dynamics_figures(profile, args.svg, config.plots)
        if args.spaghetti:
            plot_spaghetti(series, args.spaghetti, Path(args.svg) / "spaghetti.svg", config.plots)
    return 0


def cmd_simulate(args: argparse.Namespace, config: AnalysisConfig) -> int:
    seed = args.seed if args.seed is not None else 0
    walker_settings = _override(config.walker, replicates=args.replicates)
    N, T, sigma_hat = args.n, args.t, args.sigma

    if args.calibrate_from:
        empirical = _load_series(args.calibrate_from, args.top)
        empirical_N = empirical.require_uniform()
        if empirical.T < 2:
            raise TooFewSnapshots(empirical.T)
        empirical_d = diversity_from_matrix(empirical.occupancy_matrix())
        result = calibrate_sigma(
            empirical_d, empirical_N, empirical.T,
            replicates=walker_settings.replicates,
            seed=seed,
            settings=walker_settings,
            workers=config.execution.workers,
        )
        metadata = {
            "command": "simulate",
            "input": args.calibrate_from,
            "N": empirical_N,
            "T": empirical.T,
            "seed": seed,
            "top": args.top,
            "replicates": walker_settings.replicates,
        }
        write_bundle(ReportBundle.build(metadata, calibration=result), args.report)

        if args.svg:
            try:
                empirical_sigmoid = fit_sigmoid(empirical_d, settings=config.fitting)
            except DegenerateCurve:
                empirical_sigmoid = None
            plot_calibration(empirical_d, result, empirical_sigmoid,
                             Path(args.svg) / "calibration.svg", config.plots)

        N = N if N is not None else empirical_N
        T = T if T is not None else empirical.T
        sigma_hat = result.sigma_hat_star
        if args.out is None and args.report is None:
            logger.info("Report written to stdout; pass --out to also write the simulated series")
            return 0
    elif N is None or T is None or sigma_hat is None:
        raise InvalidParams("simulate needs --n, --t and --sigma, or --calibrate-from")

    series = simulate(WalkConfig(N=N, T=T, sigma_hat=sigma_hat, seed=seed))
    write_text(ranking_csv_text(series), args.out)
    return 0


COMMANDS = {
    "fit": cmd_fit,
    "dynamics": cmd_dynamics,
    "simulate": cmd_simulate,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="Analysis config JSON (default: config/analysis_config.json)")
    common.add_argument("--seed", type=int, help="Random seed for bootstrap and walker replicates")
    common.add_argument("--out", help="Output file (default: stdout)")
    common.add_argument("--svg", help="Directory for SVG figures")
    common.add_argument("--top", type=int, help="Truncate every snapshot to its top N entries")
    common.add_argument("--workers", type=int, help="Worker threads for replicates")
    common.add_argument("--log-level", choices=LOG_LEVELS, help="Override logging level")

    parser = argparse.ArgumentParser(
        prog="rank_dynamics",
        description="Rank distributions and rank dynamics of ranking time series",
    )
    subparsers = parser.add_subparsers(dest="command", help="Available commands")

    fit_parser = subparsers.add_parser("fit", parents=[common], help="Fit rank-distribution models")
    fit_parser.add_argument("--input", required=True, help="Ranking CSV (time,rank,element,score)")
    fit_parser.add_argument("--time", default="last",
                            help="Snapshot: first, last, index, time label or all "
                                 "(with all, --svg plots the last snapshot)")
    fit_parser.add_argument("--models", default="m1,m2,m3,m4,m5", help="Comma separated models")
    fit_parser.add_argument("--bootstrap", type=int, help="Bootstrap replicates for the KS index")
    fit_parser.add_argument("--sample-size", type=int, help="Synthetic sample size per replicate (>= 100)")

    dynamics_parser = subparsers.add_parser("dynamics", parents=[common], help="Compute rank dynamics measures")
    dynamics_parser.add_argument("--input", required=True, help="Ranking CSV (time,rank,element[,score])")
    dynamics_parser.add_argument("--csv", help="Write tidy per-rank table k,d,p,E,C")
    dynamics_parser.add_argument("--spaghetti", type=int, metavar="M",
                                 help="With --svg, also trace elements ever in the top M")

    simulate_parser = subparsers.add_parser("simulate", parents=[common], help="Run the random-walk model")
    simulate_parser.add_argument("--n", type=int, help="Number of elements")
    simulate_parser.add_argument("--t", type=int, help="Number of snapshots")
    simulate_parser.add_argument("--sigma", type=float, help="Noise amplitude sigma_hat")
    simulate_parser.add_argument("--replicates", type=int, help="Replicates averaged during calibration")
    simulate_parser.add_argument("--calibrate-from", help="Ranking CSV whose diversity curve sets sigma_hat")
    simulate_parser.add_argument("--report", help="Calibration report file (default: stdout)")

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    if not args.command:
        parser.print_help(sys.stderr)
        return 2

    try:
        config = load_config(args.config)
        config.execution = _override(config.execution, workers=args.workers)
        if args.log_level:
            config.logging = _override(config.logging, level=args.log_level)
    except (ValidationError, OSError) as e:
        print(f"error: invalid configuration: {e}", file=sys.stderr)
        return 2
    setup_logging(config.logging)

    try:
        _check_svg(args)
        return COMMANDS[args.command](args, config)
    except RankAnalysisError as e:
        logger.debug(f"{type(e).__name__}: {e.context}")
        print(f"error: {e}", file=sys.stderr)
        return e.exit_code
    except ValidationError as e:
        print(f"error: invalid option: {e}", file=sys.stderr)
        return 2
    except ReportValidationError as e:
        print(f"error: report does not match its schema: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
