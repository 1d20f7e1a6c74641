"""
Tasks service for Resonant.

This module generates benchmark (input, target) pairs: NARMA-10, delayed
recall of a random input, sine prediction and Mackey-Glass prediction.
All generators are deterministic in their parameters and seed, produce
equal-length input and target, and zero-pad any pre-history.
"""

from typing import Optional

import numpy as np

from src.config import (
    MACKEY_GLASS_DELAY,
    MACKEY_GLASS_DT,
    MACKEY_GLASS_HISTORY,
    MACKEY_GLASS_TRANSIENT,
    NARMA_DIVERGENCE_BOUND,
    NARMA_MAX_REGENERATIONS,
    NARMA_ORDER,
)
from src.errors import ConfigError, DimensionError, NumericalError
from src.models import Normalization, TaskData, TaskKind, TaskSpec, TimeSeries
from src.logging_utils import setup_logger

logger = setup_logger(__name__)


def narma10_target(u: np.ndarray) -> np.ndarray:
    """
    NARMA-10 response to a given input.

    y_{t+1} = 0.3 y_t + 0.05 y_t sum_{i=0}^{9} y_{t-i} + 1.5 u_{t-9} u_t + 0.1,
    with y_0 = 0 and zero history before t = 0.

    Example:
        >>> narma10_target(np.zeros(3))
        array([0.    , 0.1   , 0.1305])
    """
    u = np.asarray(u, dtype=float).reshape(-1)
    length = u.shape[0]
    y = np.zeros(length)
    for t in range(length - 1):
        window = y[max(0, t - NARMA_ORDER + 1): t + 1].sum()
        delayed = u[t - NARMA_ORDER + 1] if t >= NARMA_ORDER - 1 else 0.0
        y[t + 1] = 0.3 * y[t] + 0.05 * y[t] * window + 1.5 * delayed * u[t] + 0.1
    return y


def _narma10_series(length: int, seed: int) -> tuple[np.ndarray, np.ndarray, int, int]:
    for offset in range(NARMA_MAX_REGENERATIONS):
        rng = np.random.default_rng(seed + offset)
        u = rng.uniform(0.0, 0.5, size=length)
        with np.errstate(over="ignore", invalid="ignore"):
            y = narma10_target(u)
        if np.all(np.isfinite(y)) and np.max(np.abs(y)) <= NARMA_DIVERGENCE_BOUND:
            return u, y, seed + offset, offset
        logger.warning(f"NARMA-10 realization with seed {seed + offset} diverged, regenerating")
    raise NumericalError(f"NARMA-10 diverged for {NARMA_MAX_REGENERATIONS} consecutive seeds")


def narma10(length: int, seed: int) -> tuple[TimeSeries, TimeSeries]:
    """
    NARMA-10 benchmark with input i.i.d. uniform on [0, 0.5].

    A realization with |y_t| > 10 is discarded and the next seed tried.

    Raises:
        ConfigError: If length <= 10.
    """
    if length <= NARMA_ORDER:
        raise ConfigError(f"narma10 needs length > {NARMA_ORDER}, got {length}")
    u, y, _, _ = _narma10_series(length, seed)
    return TimeSeries(u), TimeSeries(y)


def delay_memory(length: int, delay: int, seed: int) -> tuple[TimeSeries, TimeSeries]:
    """
    Recall the input from ``delay`` steps ago; input i.i.d. uniform on [0, 1].

    Example:
        >>> u, y = delay_memory(5, 3, seed=0)
        >>> y.data[:3, 0]
        array([0., 0., 0.])
    """
    if delay < 0 or length <= delay:
        raise ConfigError(f"delay-memory needs 0 <= delay < length, got delay={delay}, length={length}")
    rng = np.random.default_rng(seed)
    u = rng.uniform(0.0, 1.0, size=length)
    return TimeSeries(u), TimeSeries(delayed(u, delay))


def delayed(u: np.ndarray, delay: int) -> np.ndarray:
    """Shift a 1-D signal right by ``delay`` steps, zero-padding the front."""
    u = np.asarray(u, dtype=float).reshape(-1)
    out = np.zeros_like(u)
    if delay == 0:
        out[:] = u
    elif delay < u.shape[0]:
        out[delay:] = u[:-delay]
    return out


def memory_capacity(r_squared_by_delay: np.ndarray) -> float:
    """
    Memory capacity: the sum of per-delay r^2 values.

    Raises:
        DimensionError: If an entry lies outside [0, 1].
    """
    values = np.asarray(r_squared_by_delay, dtype=float)
    if np.any(values < 0) or np.any(values > 1):
        raise DimensionError("memory-capacity entries must lie in [0, 1]")
    return float(values.sum())


def sine_prediction(length: int, horizon: int, period: float, seed: int = 0) -> tuple[TimeSeries, TimeSeries]:
    """
    Predict sin(2 pi (t + h) / period) from sin(2 pi t / period).

    The seed is accepted for a uniform generator signature; the task is
    deterministic.
    """
    if horizon < 0 or length <= horizon:
        raise ConfigError(f"sine-prediction needs 0 <= horizon < length, got {horizon}, {length}")
    if not period > 0:
        raise ConfigError(f"period must be > 0, got {period}")
    t = np.arange(length, dtype=float)
    u = np.sin(2.0 * np.pi * t / period)
    y = np.sin(2.0 * np.pi * (t + horizon) / period)
    return TimeSeries(u), TimeSeries(y)


def _mackey_glass_rate(x: float, x_delayed: float) -> float:
    return 0.2 * x_delayed / (1.0 + x_delayed ** 10) - 0.1 * x


def mackey_glass_series(
    length: int,
    dt: float = MACKEY_GLASS_DT,
    transient: int = MACKEY_GLASS_TRANSIENT,
    delay: float = MACKEY_GLASS_DELAY,
    history: float = MACKEY_GLASS_HISTORY,
) -> np.ndarray:
    """
    Integrate dx/dt = 0.2 x(t-17) / (1 + x(t-17)^10) - 0.1 x(t) with RK4.

    The constant history ``history`` holds for t <= 0. Delayed values that
    fall between grid points are taken from a cubic Hermite interpolant of
    the stored solution and its derivative. Samples are returned at integer
    time units after ``transient`` time units are discarded.

    Args:
        length: Number of returned unit-spaced samples.
        dt: Integration step; must divide 1.
        transient: Discarded time units.
        delay: Delay of the feedback term.
        history: Constant initial history.

    Returns:
        Array of ``length`` samples at t = transient, transient + 1, ...
    """
    substeps = int(round(1.0 / dt))
    if substeps < 1 or abs(substeps * dt - 1.0) > 1e-12:
        raise ConfigError(f"dt must divide 1, got {dt}")
    lag = int(round(delay / dt))
    total = (transient + length) * substeps
    xs = np.empty(total + 1)
    dxs = np.empty(total + 1)
    xs[0] = history

    def value_at(index: float) -> float:
        """Solution at fractional grid index (may be negative)."""
        if index <= 0:
            return history
        k = int(np.floor(index))
        s = index - k
        if s == 0.0:
            return xs[k]
        x0, x1 = xs[k], xs[k + 1]
        m0, m1 = dxs[k] * dt, dxs[k + 1] * dt
        s2, s3 = s * s, s * s * s
        return (
            (2 * s3 - 3 * s2 + 1) * x0
            + (s3 - 2 * s2 + s) * m0
            + (-2 * s3 + 3 * s2) * x1
            + (s3 - s2) * m1
        )

    for n in range(total):
        x = xs[n]
        k1 = _mackey_glass_rate(x, value_at(n - lag))
        dxs[n] = k1
        d_half = value_at(n + 0.5 - lag)
        d1 = value_at(n + 1 - lag)
        k2 = _mackey_glass_rate(x + 0.5 * dt * k1, d_half)
        k3 = _mackey_glass_rate(x + 0.5 * dt * k2, d_half)
        k4 = _mackey_glass_rate(x + dt * k3, d1)
        xs[n + 1] = x + dt * (k1 + 2 * k2 + 2 * k3 + k4) / 6.0
    dxs[total] = _mackey_glass_rate(xs[total], value_at(total - lag))
    return xs[transient * substeps:: substeps][:length]


def mackey_glass(
    length: int,
    seed: int = 0,
    horizon: int = 1,
    dt: float = MACKEY_GLASS_DT,
    transient: int = MACKEY_GLASS_TRANSIENT,
) -> tuple[TimeSeries, TimeSeries]:
    """
    Predict the Mackey-Glass series ``horizon`` steps ahead.

    The seed is accepted for a uniform generator signature; the series is
    fully determined by the integration parameters.
    """
    if length < 1:
        raise ConfigError(f"mackey-glass needs length >= 1, got {length}")
    x = mackey_glass_series(length + horizon, dt=dt, transient=transient)
    return TimeSeries(x[:length]), TimeSeries(x[horizon: horizon + length])


def generate(spec: TaskSpec, seed: Optional[int] = None) -> TaskData:
    """
    Generate the data described by a task spec, with its normalization.

    Args:
        spec: Task description.
        seed: Overrides spec.seed when given.

    Returns:
        TaskData holding raw input/target and their min/max maps onto [0, 1].

    Example:
        >>> data = generate(TaskSpec(kind=TaskKind.NARMA10, length=500, seed=3))
        >>> data.input_normalization.apply(data.input).data.max()
        1.0
    """
    spec.validate()
    seed = spec.seed if seed is None else seed
    if seed is None:
        seed = 0
    seed_used, regenerations = seed, 0
    if spec.kind is TaskKind.NARMA10:
        u, y, seed_used, regenerations = _narma10_series(spec.length, seed)
        u_series, y_series = TimeSeries(u), TimeSeries(y)
    elif spec.kind is TaskKind.DELAY_MEMORY:
        u_series, y_series = delay_memory(spec.length, spec.delay, seed)
    elif spec.kind is TaskKind.SINE_PREDICTION:
        u_series, y_series = sine_prediction(spec.length, spec.horizon, spec.period, seed)
    elif spec.kind is TaskKind.MACKEY_GLASS:
        u_series, y_series = mackey_glass(spec.length, seed, horizon=spec.horizon)
    else:
        raise ConfigError(f"unknown task kind: {spec.kind}")

    logger.info(f"Generated {spec.kind.value} task with {spec.length} samples (seed={seed_used})")
    return TaskData(
        spec=spec,
        input=u_series,
        target=y_series,
        input_normalization=Normalization.fit(u_series.data),
        target_normalization=Normalization.fit(y_series.data),
        seed_used=seed_used,
        regenerations=regenerations,
    )
