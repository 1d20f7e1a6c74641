"""
Reservoir service for Resonant.

This module holds the backend-agnostic part of the pipeline: the contract
every driven reservoir satisfies, driving a reservoir over an input series
(a pure fold X(t_i) = f(X(t_{i-1}), u(t_i))), and harvesting the observed
states into a design matrix for readout training.
"""

from typing import Any, Optional, Protocol, runtime_checkable

import numpy as np

from src.errors import DimensionError, NonFiniteInputError
from src.models import ReservoirDescriptor, StateTrajectory, TimeSeries
from src.logging_utils import setup_logger

logger = setup_logger(__name__)


@runtime_checkable
class Reservoir(Protocol):
    """
    Contract shared by every backend.

    Implementations are immutable; all state is passed in and returned.
    """

    @property
    def descriptor(self) -> ReservoirDescriptor: ...

    @property
    def input_bounds(self) -> Optional[tuple[float, float]]:
        """Closed range inputs must lie in, or None when unrestricted."""
        ...

    def initial_state(self) -> Any:
        """Default starting state."""
        ...

    def random_state(self, rng: np.random.Generator) -> Any:
        """Random starting state, used by the echo-state and quiescence tests."""
        ...

    def advance(self, state: Any, u: np.ndarray) -> tuple[Any, np.ndarray]:
        """One update: returns the next state and its observed signals."""
        ...

    def state_distance(self, a: Any, b: Any) -> float:
        """Distance between two full internal states."""
        ...


def check_input(reservoir: Reservoir, series: TimeSeries) -> None:
    """
    Validate an input series against a reservoir.

    Raises:
        DimensionError: If the channel count differs or a sample is out of range.
        NonFiniteInputError: If a sample is NaN or infinite.
    """
    expected = reservoir.descriptor.input_dimension
    if series.channels != expected:
        raise DimensionError(
            f"input has {series.channels} channels, reservoir expects {expected}"
        )
    finite_rows = np.isfinite(series.data).all(axis=1)
    if not finite_rows.all():
        raise NonFiniteInputError(int(np.argmin(finite_rows)))
    bounds = reservoir.input_bounds
    if bounds is not None:
        low, high = bounds
        outside = (series.data < low) | (series.data > high)
        if outside.any():
            step = int(np.argmax(outside.any(axis=1)))
            raise DimensionError(
                f"input sample {series.data[step].tolist()} at step {step} outside [{low}, {high}]"
            )


def drive_with_state(
    reservoir: Reservoir,
    series: TimeSeries,
    initial_state: Any = None,
    washout: int = 0,
) -> tuple[StateTrajectory, Any]:
    """
    Drive a reservoir and also return the state after the last step.

    Args:
        reservoir: Any backend implementing the Reservoir contract.
        series: Input series.
        initial_state: Starting state; None uses the backend default.
        washout: Washout recorded on the returned trajectory.

    Returns:
        The trajectory (one observed row per input step) and the final state.
    """
    check_input(reservoir, series)
    state = reservoir.initial_state() if initial_state is None else initial_state
    rows = np.empty((series.length, reservoir.descriptor.readout_dimension))
    for t in range(series.length):
        state, rows[t] = reservoir.advance(state, series.data[t])
    return StateTrajectory(rows, washout=washout), state


def drive(
    reservoir: Reservoir,
    series: TimeSeries,
    initial_state: Any = None,
    washout: int = 0,
) -> StateTrajectory:
    """
    Drive a reservoir over an input series.

    The reservoir is not mutated; driving AB from X0 equals driving B from
    the final state of driving A from X0.

    Example:
        >>> trajectory = drive(reservoir, TimeSeries(np.zeros(50)))
        >>> trajectory.length
        50
    """
    trajectory, _ = drive_with_state(reservoir, series, initial_state, washout)
    return trajectory


def harvest(
    trajectory: StateTrajectory,
    washout: Optional[int] = None,
    inputs: Optional[TimeSeries] = None,
) -> np.ndarray:
    """
    Build the regression design matrix from a trajectory.

    Args:
        trajectory: Driven states.
        washout: Leading rows to drop; defaults to the trajectory's own washout.
        inputs: Optional driving input whose columns are placed before the states.

    Returns:
        Array of shape (T - washout, [n +] K + 1); the last column is all ones.

    Raises:
        DimensionError: If washout >= T or the input length differs.
    """
    washout = trajectory.washout if washout is None else washout
    if not 0 <= washout < trajectory.length:
        raise DimensionError(f"washout {washout} must be in [0, {trajectory.length})")
    blocks = []
    if inputs is not None:
        if inputs.length != trajectory.length:
            raise DimensionError(
                f"input length {inputs.length} differs from trajectory length {trajectory.length}"
            )
        blocks.append(inputs.data[washout:])
    blocks.append(trajectory.states[washout:])
    blocks.append(np.ones((trajectory.length - washout, 1)))
    return np.hstack(blocks)
