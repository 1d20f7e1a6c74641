"""
Command-line front end for Resonant.

Subcommands:
    run           run an experiment (or sweep) and write metrics/predictions CSVs
    diagnose      run the diagnostics suite and write diagnostics CSVs
    save          train on the configured task and write a model bundle
    load          load a model bundle, check it, and write its predictions
    tasks export  write the configured task's input and target as CSV

Exit codes: 0 on success, 1 for configuration faults (bad or missing config,
unreadable or mismatching bundle), 2 for runtime faults. Failures print a
single line ``error: <kind>: <message>`` on standard error.
"""

import argparse
import dataclasses
import sys
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from src.config import (
    APP_SUBTITLE,
    APP_TITLE,
    DIAGNOSTICS_FILE,
    MEMORY_PROFILE_FILE,
    METRICS_FILE,
    PREDICTIONS_FILE,
    STATES_FILE,
    TASK_FILE,
)
from src.errors import BundleError, ConfigError, ReservoirError, StageError
from src.models import ExperimentConfig
from src.services import bundle_service, data_loader, experiment_service, readout_service, tasks_service
from src.ui import components
from src.logging_utils import log_exception, setup_logger

logger = setup_logger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_RUNTIME = 2


def build_argparser() -> argparse.ArgumentParser:
    """Assemble the argument parser with every subcommand."""
    parser = argparse.ArgumentParser(prog="resonant", description=f"{APP_TITLE}: {APP_SUBTITLE}")
    subparsers = parser.add_subparsers(dest="command", required=True)

    def common(sub: argparse.ArgumentParser, out: bool = True) -> None:
        sub.add_argument("--config", required=True, type=Path, help="Experiment config (YAML).")
        sub.add_argument("--seed", type=int, default=None, help="Override the global seed.")
        if out:
            sub.add_argument("--out", type=Path, default=None, help="Output directory.")

    run = subparsers.add_parser("run", help="Run an experiment or sweep.")
    common(run)
    run.add_argument("--emit-states", action="store_true", help="Also write states.csv.")
    run.add_argument("--workers", type=int, default=None, help="Parallel sweep workers.")
    run.set_defaults(handler=cmd_run)

    diagnose = subparsers.add_parser("diagnose", help="Run the diagnostics suite.")
    common(diagnose)
    diagnose.set_defaults(handler=cmd_diagnose)

    save = subparsers.add_parser("save", help="Train and write a model bundle.")
    common(save, out=False)
    save.add_argument("--model", required=True, type=Path, help="Bundle file to write.")
    save.set_defaults(handler=cmd_save)

    load = subparsers.add_parser("load", help="Load a model bundle and predict.")
    common(load)
    load.add_argument("--model", required=True, type=Path, help="Bundle file to read.")
    load.set_defaults(handler=cmd_load)

    tasks = subparsers.add_parser("tasks", help="Task data utilities.")
    task_commands = tasks.add_subparsers(dest="task_command", required=True)
    export = task_commands.add_parser("export", help="Write task input and target as CSV.")
    common(export)
    export.set_defaults(handler=cmd_tasks_export)
    return parser


def _load(args: argparse.Namespace) -> ExperimentConfig:
    return data_loader.load_config(args.config, seed_override=args.seed)


def _output_dir(args: argparse.Namespace, config: ExperimentConfig) -> Path:
    out = getattr(args, "out", None)
    return Path(out) if out is not None else Path(config.output.directory)


def cmd_run(args: argparse.Namespace) -> int:
    """Run an experiment or sweep and write its CSV artifacts."""
    config = _load(args)
    if args.emit_states:
        config = dataclasses.replace(
            config, output=dataclasses.replace(config.output, emit_states=True)
        )
    if args.workers is not None and args.workers < 1:
        raise ConfigError(f"--workers must be >= 1, got {args.workers}")
    results = experiment_service.run_sweep(config, workers=args.workers)

    out_dir = _output_dir(args, config)
    written = [
        data_loader.save_csv(components.metrics_frame(results), out_dir / METRICS_FILE),
        data_loader.save_csv(components.predictions_frame(results), out_dir / PREDICTIONS_FILE),
    ]
    if config.output.emit_states:
        written.append(data_loader.save_csv(components.states_frame(results), out_dir / STATES_FILE))
    swept = [sweep.parameter for sweep in config.sweeps]
    print(components.render_summary(results, [str(p) for p in written], swept=swept))
    return EXIT_OK


def cmd_diagnose(args: argparse.Namespace) -> int:
    """Run the diagnostics suite on the configured backend."""
    config = _load(args)
    report = experiment_service.run_diagnostics(config)
    out_dir = _output_dir(args, config)
    data_loader.save_csv(components.diagnostics_frame(report), out_dir / DIAGNOSTICS_FILE)
    data_loader.save_csv(components.memory_profile_frame(report), out_dir / MEMORY_PROFILE_FILE)
    print(components.render_diagnostics(report))
    return EXIT_OK


def cmd_save(args: argparse.Namespace) -> int:
    """Train on the configured task and write the model bundle."""
    config = _load(args)
    if config.sweeps:
        raise ConfigError("save needs a config without sweep declarations")
    result = experiment_service.run_experiment(config)
    bundle_service.save_bundle(bundle_service.bundle_from_result(result), args.model)
    print(components.render_summary([result], [str(args.model)]))
    return EXIT_OK


def cmd_load(args: argparse.Namespace) -> int:
    """Load a bundle, validate it against the config, and predict the configured task."""
    config = experiment_service.resolve_seeds(_load(args))
    bundle = bundle_service.load_bundle(args.model)
    reservoir = bundle_service.validate_bundle(bundle, config)
    data = tasks_service.generate(config.task)
    predictions = bundle_service.predict(bundle, data.input, reservoir)
    train_end, _ = experiment_service.split_points(
        data.input.length, config.experiment.train_fraction, config.experiment.washout
    )
    targets = data.target.data[train_end:]
    frame = components.single_predictions_frame(
        np.arange(train_end, data.target.length), targets, predictions[train_end:]
    )
    path = data_loader.save_csv(frame, _output_dir(args, config) / PREDICTIONS_FILE)
    nmse = readout_service.nmse(predictions[train_end:], targets)
    print(f"{bundle.backend} model from {args.model}: test NMSE {nmse:.6g}")
    print(f"wrote: {path}")
    return EXIT_OK


def cmd_tasks_export(args: argparse.Namespace) -> int:
    """Write the configured task's raw input and target."""
    config = experiment_service.resolve_seeds(_load(args))
    data = tasks_service.generate(config.task)
    path = data_loader.save_csv(components.task_frame(data), _output_dir(args, config) / TASK_FILE)
    print(f"wrote: {path}")
    return EXIT_OK


def exit_code_for(error: Exception) -> int:
    """Map a failure onto the documented exit codes."""
    cause = error.cause if isinstance(error, StageError) else error
    if isinstance(cause, (ConfigError, BundleError)):
        return EXIT_CONFIG
    return EXIT_RUNTIME


def _report(error: Exception) -> None:
    message = " ".join(str(error).split())
    print(f"error: {type(error).__name__}: {message}", file=sys.stderr)


def main(argv: Optional[list[str]] = None) -> int:
    """
    Parse arguments, run the selected subcommand and return its exit code.

    Example:
        >>> main(["run", "--config", "content/sine_smoke.yaml", "--out", "results"])
        0
    """
    args = build_argparser().parse_args(argv)
    handler: Callable[[argparse.Namespace], int] = args.handler
    try:
        return handler(args)
    except ReservoirError as e:
        log_exception(logger, e, f"{args.command} failed")
        _report(e)
        return exit_code_for(e)
    except OSError as e:
        log_exception(logger, e, f"{args.command} failed")
        _report(e)
        return EXIT_CONFIG
    except (ValueError, ArithmeticError, MemoryError) as e:
        log_exception(logger, e, f"{args.command} failed")
        _report(e)
        return EXIT_RUNTIME
