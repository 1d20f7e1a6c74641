"""
Output components for Resonant.

This module turns experiment results and diagnostics reports into the
tables written as CSV and into the human-readable summary printed on
standard output. Column orders here are the CSV schema; they do not change
within a format version.
"""

import dataclasses
import enum
from datetime import datetime
from typing import Any, Iterable, Optional

import numpy as np
import pandas as pd

from src.config import APP_TITLE, DIAGNOSTICS_COLUMNS, NONE_SENTINEL
from src.models import DiagnosticsReport, ExperimentConfig, TaskData
from src.services.experiment_service import ExperimentResult

CONFIG_SECTIONS = ("task", "esn", "qrc", "readout", "experiment")


def _cell(value: Any) -> Any:
    if value is None:
        return NONE_SENTINEL
    if isinstance(value, enum.Enum):
        return value.value
    if isinstance(value, tuple):
        return " ".join(format(float(v), ".17g") for v in value)
    return value


def flatten_config(config: ExperimentConfig) -> dict[str, Any]:
    """
    Flatten the config fields that shape an experiment into dotted columns.

    Example:
        >>> flatten_config(ExperimentConfig(esn=EsnConfig()))["esn.nodes"]
        100
    """
    row: dict[str, Any] = {}
    for section in CONFIG_SECTIONS:
        value = getattr(config, section)
        if value is None:
            continue
        for f in dataclasses.fields(value):
            row[f"{section}.{f.name}"] = _cell(getattr(value, f.name))
    row["seed"] = config.seed
    return row


def metrics_frame(results: Iterable[ExperimentResult]) -> pd.DataFrame:
    """One row per sweep point: point index, config fields, then metrics."""
    rows = [
        {"point": point, **flatten_config(result.config), **result.metrics}
        for point, result in enumerate(results)
    ]
    return pd.DataFrame(rows)


def _channel_columns(prefix: str, values: np.ndarray) -> dict[str, np.ndarray]:
    return {f"{prefix}_{c}": values[:, c] for c in range(values.shape[1])}


def predictions_frame(results: Iterable[ExperimentResult]) -> pd.DataFrame:
    """Test-segment targets and predictions per channel for every point."""
    frames = []
    for point, result in enumerate(results):
        frames.append(
            pd.DataFrame(
                {
                    "point": point,
                    "step": result.test_steps,
                    **_channel_columns("target", result.test_targets),
                    **_channel_columns("prediction", result.test_predictions),
                }
            )
        )
    return pd.concat(frames, ignore_index=True)


def states_frame(results: Iterable[ExperimentResult]) -> pd.DataFrame:
    """Every observed reservoir signal at every step for every point."""
    frames = []
    for point, result in enumerate(results):
        states = result.trajectory.states
        frames.append(
            pd.DataFrame(
                {
                    "point": point,
                    "step": np.arange(states.shape[0]),
                    **_channel_columns("signal", states),
                }
            )
        )
    return pd.concat(frames, ignore_index=True)


def single_predictions_frame(
    steps: np.ndarray, targets: np.ndarray, predictions: np.ndarray
) -> pd.DataFrame:
    """Predictions table for one model (point 0), as written by ``load``."""
    return pd.DataFrame(
        {
            "point": 0,
            "step": steps,
            **_channel_columns("target", targets),
            **_channel_columns("prediction", predictions),
        }
    )


def diagnostics_frame(report: DiagnosticsReport) -> pd.DataFrame:
    """Single-row diagnostics table; a missing convergence step is written as 'none'."""
    row = {column: _cell(getattr(report, column)) for column in DIAGNOSTICS_COLUMNS}
    return pd.DataFrame([row], columns=DIAGNOSTICS_COLUMNS)


def memory_profile_frame(report: DiagnosticsReport) -> pd.DataFrame:
    profile = np.asarray(report.memory_profile, dtype=float)
    return pd.DataFrame({"delay": np.arange(1, profile.size + 1), "r2": profile})


def task_frame(data: TaskData) -> pd.DataFrame:
    """Raw task input and target, one row per step."""
    return pd.DataFrame(
        {
            "step": np.arange(data.input.length),
            **_channel_columns("input", data.input.data),
            **_channel_columns("target", data.target.data),
        }
    )


def render_summary(
    results: list[ExperimentResult],
    written: list[str],
    swept: Iterable[str] = (),
    timestamp: Optional[datetime] = None,
) -> str:
    """
    Human-readable report of a run.

    The timestamp appears here only, never in CSV output.
    """
    timestamp = timestamp or datetime.now()
    lines = [f"{APP_TITLE} run finished {timestamp:%Y-%m-%d %H:%M:%S}"]
    if results:
        config = results[0].config
        lines.append(
            f"task: {config.task.kind.value}  backend: {config.backend_name}  points: {len(results)}"
        )
        table = metrics_frame(results)
        metric_columns = list(results[0].metrics)
        keep = ["point"] + list(swept) + metric_columns
        lines.append(table[[c for c in keep if c in table]].to_string(index=False))
    if written:
        lines.append("wrote: " + ", ".join(written))
    return "\n".join(lines)


def render_diagnostics(report: DiagnosticsReport, timestamp: Optional[datetime] = None) -> str:
    """Human-readable diagnostics report."""
    timestamp = timestamp or datetime.now()
    lines = [f"{APP_TITLE} diagnostics {timestamp:%Y-%m-%d %H:%M:%S}"]
    for column in DIAGNOSTICS_COLUMNS:
        lines.append(f"  {column}: {_cell(getattr(report, column))}")
    return "\n".join(lines)
