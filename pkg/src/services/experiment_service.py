"""
Experiment service for Resonant.

This module runs the train/evaluate protocol end to end: generate task
data, build the configured reservoir, drive it over the normalized input,
fit the readout on a contiguous training prefix and score it on the
held-out suffix. Sweep declarations expand into one experiment per grid
point; points are independent and may run in worker processes.
"""

import dataclasses
import itertools
import multiprocessing
from dataclasses import dataclass
from typing import Any, Callable, Optional, TypeVar

import numpy as np

from src.config import Defaults
from src.errors import ConfigError, ReservoirError, StageError
from src.models import (
    DiagnosticsReport,
    ExperimentConfig,
    Readout,
    StateTrajectory,
    TaskData,
    TaskKind,
    TimeSeries,
)
from src.services import (
    diagnostics_service,
    esn_service,
    qrc_service,
    readout_service,
    tasks_service,
)
from src.services.reservoir_service import Reservoir, drive, harvest
from src.logging_utils import setup_logger

logger = setup_logger(__name__)

T = TypeVar("T")

SWEEPABLE_SECTIONS = ("task", "esn", "qrc", "readout", "experiment", "diagnostics")
PERSISTENCE_TASKS = (TaskKind.NARMA10, TaskKind.MACKEY_GLASS)


@dataclass(frozen=True)
class ExperimentResult:
    """
    Everything one experiment produced.

    Attributes:
        config: The config with every seed resolved.
        metrics: Ordered metric name -> value.
        task: Generated task data (raw units).
        trajectory: Observed states over the whole series.
        readout: Fitted readout.
        train_end: First test step.
        washout: Leading training steps left out of the fit.
        predictions: Readout output over the whole series, in target units.
    """

    config: ExperimentConfig
    metrics: dict[str, float]
    task: TaskData
    trajectory: StateTrajectory
    readout: Readout
    train_end: int
    washout: int
    predictions: np.ndarray

    @property
    def test_steps(self) -> np.ndarray:
        return np.arange(self.train_end, self.task.target.length)

    @property
    def test_predictions(self) -> np.ndarray:
        return self.predictions[self.train_end:]

    @property
    def test_targets(self) -> np.ndarray:
        return self.task.target.data[self.train_end:]


def resolve_seeds(config: ExperimentConfig) -> ExperimentConfig:
    """
    Fill in every unset seed from the global seed.

    The task seed defaults to the global seed, the backend seed to the
    global seed plus one.
    """
    task = config.task
    if task.seed is None:
        task = dataclasses.replace(task, seed=config.seed)
    backend_seed = config.seed + Defaults.BACKEND_SEED_OFFSET
    esn, qrc = config.esn, config.qrc
    if esn is not None and esn.seed is None:
        esn = dataclasses.replace(esn, seed=backend_seed)
    if qrc is not None and qrc.seed is None:
        qrc = dataclasses.replace(qrc, seed=backend_seed)
    return dataclasses.replace(config, task=task, esn=esn, qrc=qrc)


def build_reservoir(config: ExperimentConfig) -> Reservoir:
    """Build the backend named by a seed-resolved config."""
    if config.esn is not None:
        return esn_service.generate(config.esn)
    if config.qrc is not None:
        return qrc_service.build(config.qrc)
    raise ConfigError("exactly one backend section (esn or qrc) is required")


def drive_reservoir(reservoir: Reservoir, series: TimeSeries) -> StateTrajectory:
    """Drive any backend; the quantum one goes through its checked driver."""
    if isinstance(reservoir, qrc_service.QrcReservoir):
        return qrc_service.qrc_drive(reservoir, series)
    return drive(reservoir, series)


def split_points(length: int, train_fraction: float, washout: Optional[int]) -> tuple[int, int]:
    """
    Contiguous train/test boundary and washout for a series of ``length`` steps.

    Returns:
        (train_end, washout); the training rows are [washout, train_end) and
        the test rows [train_end, length).

    Raises:
        ConfigError: If the split leaves no training or no test rows.
    """
    if not 0 < train_fraction < 1:
        raise ConfigError(f"train fraction must be in (0, 1), got {train_fraction}")
    train_end = int(round(length * train_fraction))
    if washout is None:
        washout = int(round(train_end * Defaults.WASHOUT_FRACTION))
    if train_end >= length:
        raise ConfigError(f"train fraction {train_fraction} leaves no test data")
    if not 0 <= washout < train_end:
        raise ConfigError(
            f"washout {washout} leaves no training rows before step {train_end}"
        )
    return train_end, washout


def _stage(name: str, action: Callable[[], T]) -> T:
    try:
        return action()
    except StageError:
        raise
    except (ReservoirError, ValueError, np.linalg.LinAlgError) as e:
        raise StageError(name, e) from e


def _task_metrics(
    config: ExperimentConfig, target: np.ndarray, train_end: int
) -> dict[str, float]:
    if config.task.kind not in PERSISTENCE_TASKS:
        return {}
    persistence = target[train_end - 1: -1]
    return {"nmse_persistence": readout_service.nmse(persistence, target[train_end:])}


def run_experiment(config: ExperimentConfig) -> ExperimentResult:
    """
    Run one experiment: generate, drive, train, evaluate.

    Inputs are mapped onto [0, 1] with the task's realized normalization and
    the readout is trained on normalized targets; predictions are mapped back
    to target units before scoring.

    Args:
        config: Experiment description; sweeps are ignored here.

    Returns:
        ExperimentResult with metrics nmse, nmse_train, rmse, r2 and any
        task-specific metrics.

    Raises:
        ConfigError: For an invalid config or degenerate split.
        StageError: Wrapping any downstream failure with its stage label
            (task, reservoir, drive, readout, evaluate).

    Example:
        >>> result = run_experiment(ExperimentConfig(esn=EsnConfig(), seed=0))
        >>> result.metrics["nmse"] < 1e-3
        True
    """
    config.validate()
    config = resolve_seeds(config)
    data = _stage("task", lambda: tasks_service.generate(config.task))
    train_end, washout = split_points(
        data.input.length, config.experiment.train_fraction, config.experiment.washout
    )
    reservoir = _stage("reservoir", lambda: build_reservoir(config))

    u = data.input_normalization.apply(data.input)
    y = data.target_normalization.apply(data.target).data
    trajectory = _stage("drive", lambda: drive_reservoir(reservoir, u))
    design = harvest(trajectory, washout=0, inputs=u if config.readout.include_input else None)

    metrics: dict[str, float] = {}
    regularization = config.readout.regularization
    train_rows = slice(washout, train_end)
    if config.readout.regularization_grid:
        regularization, _ = _stage(
            "readout",
            lambda: readout_service.select_regularization(
                design[train_rows],
                y[train_rows],
                config.readout.regularization_grid,
                Defaults.VALIDATION_FRACTION,
            ),
        )
    readout = _stage("readout", lambda: readout_service.fit(design[train_rows], y[train_rows], regularization))
    logger.info(
        f"Fitted readout on {train_end - washout} rows (washout={washout}, lambda={regularization})"
    )

    def evaluate() -> np.ndarray:
        normalized = TimeSeries(readout_service.apply(readout, design))
        return data.target_normalization.invert(normalized).data

    predictions = _stage("evaluate", evaluate)
    target = data.target.data

    def score() -> None:
        test, train = slice(train_end, None), train_rows
        metrics["nmse"] = readout_service.nmse(predictions[test], target[test])
        metrics["nmse_train"] = readout_service.nmse(predictions[train], target[train])
        metrics["rmse"] = readout_service.rmse(predictions[test], target[test])
        metrics["r2"] = readout_service.r_squared(predictions[test], target[test])
        metrics.update(_task_metrics(config, target, train_end))
        if config.readout.regularization_grid:
            metrics["selected_regularization"] = float(regularization)

    _stage("evaluate", score)
    logger.info(f"Experiment done: NMSE={metrics['nmse']:.6g}")
    return ExperimentResult(
        config=config,
        metrics=metrics,
        task=data,
        trajectory=trajectory,
        readout=readout,
        train_end=train_end,
        washout=washout,
        predictions=predictions,
    )


def _apply_override(config: ExperimentConfig, parameter: str, value: Any) -> ExperimentConfig:
    if parameter == "seed":
        return dataclasses.replace(config, seed=value)
    section, _, name = parameter.partition(".")
    if section not in SWEEPABLE_SECTIONS or not name:
        raise ConfigError(f"sweep parameter '{parameter}' does not name a config field")
    current = getattr(config, section)
    if current is None:
        raise ConfigError(f"sweep parameter '{parameter}' refers to an unused section")
    if name not in {f.name for f in dataclasses.fields(current)}:
        raise ConfigError(f"sweep parameter '{parameter}' does not name a config field")
    return dataclasses.replace(config, **{section: dataclasses.replace(current, **{name: value})})


def expand_sweeps(config: ExperimentConfig) -> list[ExperimentConfig]:
    """
    Expand sweep declarations into one config per grid point.

    Several declarations form their Cartesian product in declaration order,
    the first declaration varying slowest. Without sweeps the config itself
    is the only point.

    Raises:
        ConfigError: If a parameter does not name an existing field or a
            value list is empty.
    """
    if not config.sweeps:
        return [config]
    for sweep in config.sweeps:
        if not sweep.values:
            raise ConfigError(f"sweep over '{sweep.parameter}' has no values")
    points = []
    for combination in itertools.product(*(sweep.values for sweep in config.sweeps)):
        point = dataclasses.replace(config, sweeps=())
        for sweep, value in zip(config.sweeps, combination):
            point = _apply_override(point, sweep.parameter, value)
        point.validate()
        points.append(point)
    return points


def run_sweep(config: ExperimentConfig, workers: Optional[int] = None) -> list[ExperimentResult]:
    """
    Run every sweep point and return the results in point order.

    Args:
        config: Experiment config, possibly with sweep declarations.
        workers: Process count; defaults to config.experiment.workers.
    """
    points = expand_sweeps(config)
    workers = config.experiment.workers if workers is None else workers
    workers = max(1, min(workers, len(points)))
    logger.info(f"Running {len(points)} sweep point(s) on {workers} worker(s)")
    if workers == 1:
        return [run_experiment(point) for point in points]
    with multiprocessing.Pool(processes=workers) as pool:
        return pool.map(run_experiment, points)


def run_diagnostics(config: ExperimentConfig) -> DiagnosticsReport:
    """Build the configured backend and run the diagnostics suite on it."""
    config.validate()
    config = resolve_seeds(config)
    reservoir = _stage("reservoir", lambda: build_reservoir(config))
    return _stage(
        "diagnostics",
        lambda: diagnostics_service.run_diagnostics(
            reservoir,
            config.diagnostics,
            seed=config.seed,
            regularization=config.readout.regularization,
        ),
    )
