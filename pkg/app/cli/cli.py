import argparse
import os
import sys
from typing import Optional, Sequence

import numpy as np

import app.helpers.config as cfg
from app.bench.harness import METHODS, PRESETS, case_label, convergence_study, preset_cases, write_records_csv
from app.bench.problems import ModelSpec
from app.cli.helpers import format_report, run_summary, slope_lines, sobol_frame, split_methods, strata_frame, write_frame
from app.helpers.errors import ConfigError, SslhsError
from app.helpers.experiment import ExperimentFile, load_experiment
from app.helpers.general import ensure_dirs, read_json
from app.helpers.paths import get_convergence_csv_path, get_trace_path
from app.logger import configure_logger, logger, shutdown_logger
from app.methods.driver import RunConfig, RunTrace, run_sequential

NUMERICAL_EXIT = 4


# =========================
# Settings resolution
# =========================


def _experiment(args) -> ExperimentFile:
    return load_experiment(args.config) if getattr(args, "config", None) else ExperimentFile()


def _seed(args, exp: ExperimentFile) -> int:
    seed = exp.resolve("seed", args.seed, None)
    if seed is None and os.environ.get(cfg.SEED_ENV):
        try:
            seed = int(os.environ[cfg.SEED_ENV])
        except ValueError:
            raise ConfigError(f"{cfg.SEED_ENV} must be an integer, got {os.environ[cfg.SEED_ENV]!r}") from None
    return cfg.DEFAULT_SEED if seed is None else seed


def _model_spec(args, exp: ExperimentFile) -> ModelSpec:
    problem = exp.resolve("problem", args.problem, None)
    if problem is None:
        raise ConfigError("no problem given (use --problem, a preset or an experiment file)")
    problem = problem.lower()
    dprime = exp.resolve("dprime", args.dprime, 2)
    default_d = {"p1": 2, "p2": dprime, "p3": 2 * dprime}.get(problem)
    d = exp.resolve("d", args.d, default_d)
    if d is None:
        raise ConfigError(f"--d is required for problem {problem!r}")
    return ModelSpec(
        kind=problem,
        dimension=d,
        a=exp.resolve("a", args.a, 0.3),
        delta=exp.resolve("delta", args.delta, 1.0),
        dprime=dprime,
        radius=exp.resolve("radius", args.radius, 0.4),
        radius2=exp.resolve("radius2", args.radius2, exp.resolve("radius", args.radius, 0.4)),
        c=exp.resolve("c", args.c, 1.0),
        command=exp.resolve("blackbox_cmd", args.blackbox_cmd, None),
    )


def _run_config(args, exp: ExperimentFile, spec: ModelSpec, stages: int) -> RunConfig:
    return RunConfig(
        dimension=spec.dimension,
        stages=stages,
        nbar=exp.resolve("nbar", args.nbar, cfg.DEFAULT_NBAR),
        seed=_seed(args, exp),
        score_mode=exp.resolve("score_mode", args.score_mode, cfg.DEFAULT_SCORE_MODE),
        alpha=exp.resolve("alpha", args.alpha, cfg.DEFAULT_ALPHA),
        basis=exp.resolve("basis", args.basis, cfg.DEFAULT_BASIS),
        model=spec,
        workers=exp.resolve("workers", args.workers, cfg.DEFAULT_WORKERS),
    )


# =========================
# Commands
# =========================


def cmd_run(args) -> int:
    """
    Run the sequential estimator once: trace JSON under `--out`, one-line summary on stdout.
    """
    exp = _experiment(args)
    spec = _model_spec(args, exp)
    config = _run_config(args, exp, spec, exp.resolve("stages", args.stages, cfg.DEFAULT_STAGES))
    out = exp.resolve("out", args.out, None)
    trace_path = get_trace_path(out)
    surrogates = exp.resolve("surrogates", args.surrogates, None)

    logger.info("Run %s (%s), d=%d, L=%d, nbar=%d, seed=%d", spec.kind.upper(), spec.params,
                config.dimension, config.stages, config.nbar, config.seed)
    _, trace = run_sequential(config, trace_path=trace_path, surrogates_path=surrogates)
    print(run_summary(trace, trace_path))
    return 0


def cmd_convergence(args) -> int:
    """
    Convergence study of one problem or of every case of a preset: one CSV per case under
    `--out`, fitted slopes per method on stdout.
    """
    exp = _experiment(args)
    preset = exp.resolve("preset", args.preset, None)
    schedule = exp.resolve("schedule", args.schedule, cfg.DEFAULT_SCHEDULE)
    reps = exp.resolve("reps", args.reps, cfg.DEFAULT_REPS)
    methods = split_methods(exp.resolve("methods", split_methods(args.methods), list(METHODS)))
    out = exp.resolve("out", args.out, None)

    if reps < 2:
        raise ConfigError(f"--reps must be >= 2, got {reps}")
    if not schedule or any(s < 1 for s in schedule):
        raise ConfigError(f"the stage schedule must be non-empty and positive, got {schedule}")
    unknown = [m for m in methods if m not in METHODS]
    if unknown or not methods:
        raise ConfigError(f"unknown methods {unknown} (expected some of {', '.join(METHODS)})")

    cases = preset_cases(preset) if preset else [_model_spec(args, exp)]
    # every case is validated before the first sample is drawn
    configs = [_run_config(args, exp, spec, schedule[0]) for spec in cases]

    for config in configs:
        label = case_label(config.model)
        logger.info("Convergence study %s: schedule %s, R=%d", label, schedule, reps)
        study = convergence_study(config, schedule, reps, methods, workers=config.workers)
        path = write_records_csv(study.records, get_convergence_csv_path(label, out))
        for line in slope_lines(study.slopes, label):
            print(line)
        print(f"{label}: csv={path}")
    return 0


def cmd_report(args) -> int:
    """Print the report of a trace file; optionally export its Sobol and stratification tables."""
    if not 0.0 < args.alpha <= 1.0:
        raise ConfigError(f"--alpha must be in (0, 1], got {args.alpha}")
    try:
        data = read_json(args.trace)
    except FileNotFoundError:
        raise ConfigError(f"trace file not found: {args.trace}") from None
    except ValueError as e:
        raise ConfigError(f"trace file {args.trace} is not valid JSON: {e}") from e

    trace = RunTrace.from_dict(data)
    try:
        report = format_report(trace, args.alpha)
        tables = {
            "Sobol": (sobol_frame(trace), args.sobol_csv) if args.sobol_csv else None,
            "Stratification": (strata_frame(trace), args.strata_csv) if args.strata_csv else None,
        }
    except (KeyError, TypeError, ValueError) as e:
        raise ConfigError(f"trace file {args.trace} is malformed: {type(e).__name__} {e}") from e

    print(report)
    for name, table in tables.items():
        if table is not None:
            write_frame(*table)
            logger.info("%s table written to %s", name, table[1])
    return 0


# =========================
# Parser
# =========================


def _int_list(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _add_model_flags(p: argparse.ArgumentParser):
    p.add_argument("--config", help="experiment file (.toml, .yml or .yaml)")
    p.add_argument("--problem", choices=["p1", "p2", "p3", "blackbox"], type=str.lower)
    p.add_argument("--d", type=int, help="input dimension")
    p.add_argument("--dprime", type=int, help="effective block dimension d' of P2/P3")
    p.add_argument("--a", type=float, help="P1 ridge level a (default 0.3)")
    p.add_argument("--delta", type=float, help="P1 smoothing δ (default 1)")
    p.add_argument("--radius", type=float, help="P2/P3 ball radius (default 0.4)")
    p.add_argument("--radius2", type=float, help="P3 second ball radius (default: --radius)")
    p.add_argument("--c", type=float, help="P2/P3 scale c (default 1)")
    p.add_argument("--blackbox-cmd", dest="blackbox_cmd", help="command of a line-protocol model")
    p.add_argument("--nbar", type=int, help=f"samples per stratum (default {cfg.DEFAULT_NBAR})")
    p.add_argument("--seed", type=int, help=f"master seed (default ${cfg.SEED_ENV} or {cfg.DEFAULT_SEED})")
    p.add_argument("--workers", type=int, help="worker threads")
    p.add_argument("--out", help="output folder")
    p.add_argument("--score-mode", dest="score_mode", choices=["total", "first_order"])
    p.add_argument("--basis", choices=["legendre", "stieltjes"])
    p.add_argument("--alpha", type=float, help="effective-dimension threshold (default 0.99)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sslhs",
        description="Sequential stratified LHS estimators refined by local gPC/Sobol sensitivities.")
    parser.add_argument("--log-level", dest="log_level", default=None, help=f"log level (default {cfg.LOG_LEVEL})")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run the sequential estimator once")
    _add_model_flags(p_run)
    p_run.add_argument("--stages", type=int, help=f"number of stages L (default {cfg.DEFAULT_STAGES})")
    p_run.add_argument("--surrogates", help="also dump every stratum's gPC coefficients to this JSON file")
    p_run.set_defaults(func=cmd_run, writes_output=True)

    p_conv = sub.add_parser("convergence", help="variance vs N study against LHS and SMC")
    _add_model_flags(p_conv)
    p_conv.add_argument("--reps", type=int, help=f"replications per point (default {cfg.DEFAULT_REPS})")
    p_conv.add_argument("--schedule", type=_int_list, help="comma-separated stage counts, e.g. 6,20,63")
    p_conv.add_argument("--methods", help=f"comma-separated subset of {','.join(METHODS)}")
    p_conv.add_argument("--preset", choices=list(PRESETS), help="run every case of a preset")
    p_conv.set_defaults(func=cmd_convergence, writes_output=True)

    p_rep = sub.add_parser("report", help="summarise a trace file")
    p_rep.add_argument("trace", help="trace JSON written by `run`")
    p_rep.add_argument("--alpha", type=float, default=cfg.DEFAULT_ALPHA)
    p_rep.add_argument("--sobol-csv", dest="sobol_csv", help="write stage,stratum_id,subset_bitmask,sigma2")
    p_rep.add_argument("--strata-csv", dest="strata_csv", help="write the stratum boxes of every stage")
    p_rep.set_defaults(func=cmd_report, writes_output=False)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    """
    Entry point. Returns the process exit status: 0 ok, 2 configuration or I/O error, 3 model
    failure, 4 numerical failure.
    """
    args = build_parser().parse_args(argv)
    # `report` only reads; it neither creates the run folders nor the log file
    if args.writes_output:
        ensure_dirs()
    configure_logger(level=args.log_level, to_file=args.writes_output)
    logger.debug("%s %s", cfg.APP_NAME, args.command)
    try:
        return args.func(args)
    except SslhsError as e:
        logger.error("%s: %s", type(e).__name__, e)
        return e.exit_code
    except OSError as e:
        logger.error("ConfigError: I/O failure: %s", e)
        return ConfigError.exit_code
    except (np.linalg.LinAlgError, FloatingPointError) as e:
        logger.error("Numerical failure: %s", e)
        return NUMERICAL_EXIT
    finally:
        sys.stdout.flush()
        shutdown_logger()
