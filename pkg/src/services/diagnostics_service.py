"""
Diagnostics service for Resonant.

This module turns the qualitative reservoir-quality criteria into scores:
echo state property (initial-condition forgetting), separation of
different inputs, reproducibility under small input noise, the fading
memory profile, relaxation to quiescence without input, and kernel rank
(how many independent directions distinct inputs are spread over).

None of the scores has a universal pass threshold; they are meant for
comparing reservoirs and parameter settings. Edge-of-chaos questions are
explored by sweeping spectral radius or tau, not by a built-in detector.
"""

from dataclasses import dataclass
from itertools import combinations
from typing import Optional

import numpy as np

from src.config import Defaults, Tolerance
from src.errors import DimensionError
from src.models import DiagnosticsReport, DiagnosticsSettings, TimeSeries
from src.services import readout_service, tasks_service
from src.services.reservoir_service import Reservoir, check_input, drive, harvest
from src.logging_utils import setup_logger

logger = setup_logger(__name__)


@dataclass(frozen=True)
class ConvergenceResult:
    """
    Outcome of a convergence-style diagnostic.

    Attributes:
        step: First 1-based step below epsilon, or None if never reached.
        final_distance: Distance at the last step.
        distances: Distance after every step.
    """

    step: Optional[int]
    final_distance: float
    distances: np.ndarray


def _first_below(distances: np.ndarray, epsilon: float) -> Optional[int]:
    below = np.flatnonzero(distances < epsilon)
    return int(below[0]) + 1 if below.size else None


def _clip_to_bounds(reservoir: Reservoir, data: np.ndarray) -> np.ndarray:
    bounds = reservoir.input_bounds
    if bounds is None:
        return data
    return np.clip(data, bounds[0], bounds[1])


def echo_state_test(
    reservoir: Reservoir,
    series: TimeSeries,
    trials: int = Defaults.ESP_TRIALS,
    epsilon: float = Defaults.ESP_EPSILON,
    seed: int = 0,
) -> ConvergenceResult:
    """
    Drive from several random initial states under one input and measure forgetting.

    Args:
        reservoir: Any backend.
        series: Common input.
        trials: Number of random initial states (>= 2).
        epsilon: Convergence threshold on the largest pairwise distance.
        seed: Seed for the initial states.

    Returns:
        ConvergenceResult; non-convergence is reported as step None.

    Example:
        >>> result = echo_state_test(esn, TimeSeries(rng.uniform(size=500)), trials=2)
        >>> result.step is not None
        True
    """
    if trials < 2:
        raise DimensionError(f"echo-state test needs at least 2 trials, got {trials}")
    check_input(reservoir, series)
    rng = np.random.default_rng(seed)
    states = [reservoir.random_state(rng) for _ in range(trials)]
    distances = np.empty(series.length)
    for t in range(series.length):
        states = [reservoir.advance(state, series.data[t])[0] for state in states]
        distances[t] = max(
            reservoir.state_distance(a, b) for a, b in combinations(states, 2)
        )
    step = _first_below(distances, epsilon)
    if step is None:
        logger.warning(
            f"Echo-state test did not converge below {epsilon} in {series.length} steps "
            f"(final distance {distances[-1]:.3e})"
        )
    return ConvergenceResult(step=step, final_distance=float(distances[-1]), distances=distances)


def separation_test(
    reservoir: Reservoir,
    base: TimeSeries,
    perturbed: TimeSeries,
    washout: int = 0,
) -> float:
    """
    Mean post-washout distance between two driven trajectories, over mean state norm.

    Symmetric in its two inputs; identical inputs score 0.
    """
    if base.length != perturbed.length:
        raise DimensionError("separation test needs inputs of equal length")
    a = drive(reservoir, base).states[washout:]
    b = drive(reservoir, perturbed).states[washout:]
    if a.shape[0] == 0:
        raise DimensionError(f"washout {washout} leaves no steps to compare")
    mean_distance = np.linalg.norm(a - b, axis=1).mean()
    mean_norm = 0.5 * (np.linalg.norm(a, axis=1).mean() + np.linalg.norm(b, axis=1).mean())
    if mean_norm == 0.0:
        return 0.0
    return float(mean_distance / mean_norm)


def reproducibility_test(
    reservoir: Reservoir,
    series: TimeSeries,
    noise: float = Defaults.NOISE_AMPLITUDE,
    trials: int = Defaults.NOISE_TRIALS,
    seed: int = 0,
) -> float:
    """
    Finite-difference sensitivity of the trajectory to uniform input noise.

    Returns:
        Mean state distance between the clean trajectory and trials driven
        with input + U[-noise, noise], divided by noise. Lower is better;
        noise = 0 returns 0.
    """
    if noise < 0:
        raise DimensionError(f"noise amplitude must be >= 0, got {noise}")
    if trials < 1:
        raise DimensionError(f"reproducibility test needs at least 1 trial, got {trials}")
    if noise == 0:
        return 0.0
    clean = drive(reservoir, series).states
    rng = np.random.default_rng(seed)
    total = 0.0
    for _ in range(trials):
        jitter = rng.uniform(-noise, noise, size=series.data.shape)
        noisy_input = TimeSeries(_clip_to_bounds(reservoir, series.data + jitter), series.dt)
        noisy = drive(reservoir, noisy_input).states
        total += float(np.linalg.norm(noisy - clean, axis=1).mean())
    return total / trials / noise


def fading_memory_profile(
    reservoir: Reservoir,
    max_delay: int = Defaults.MAX_DELAY,
    length: int = Defaults.MEMORY_LENGTH,
    seed: int = 0,
    regularization: float = Defaults.REGULARIZATION,
    train_fraction: float = Defaults.TRAIN_FRACTION,
    washout: Optional[int] = None,
) -> np.ndarray:
    """
    Test r^2 of delayed-input recall for every delay 1..max_delay.

    The reservoir is driven once; one readout per delay is fitted over the
    shared trajectory. Negative test r^2 is clamped to 0.

    Returns:
        Array of length max_delay with entries in [0, 1].
    """
    if max_delay < 1:
        raise DimensionError(f"max_delay must be >= 1, got {max_delay}")
    u, _ = tasks_service.delay_memory(length, 0, seed)
    driven = drive(reservoir, u)
    train_end = int(round(length * train_fraction))
    washout = int(round(train_end * Defaults.WASHOUT_FRACTION)) if washout is None else washout
    if not 0 <= washout < train_end < length:
        raise DimensionError("memory profile split leaves no training or test rows")

    design = harvest(driven, washout=0)
    raw = u.data[:, 0]
    targets = {d: tasks_service.delayed(raw, d) for d in range(1, max_delay + 1)}
    readouts = readout_service.fit_readouts(
        design[washout:train_end],
        {d: y[washout:train_end] for d, y in targets.items()},
        regularization,
    )
    test_design = design[train_end:]
    profile = np.empty(max_delay)
    for d, readout in readouts.items():
        predicted = readout_service.apply(readout, test_design)
        score = readout_service.r_squared(predicted, targets[d][train_end:])
        profile[d - 1] = min(max(score, 0.0), 1.0)
    return profile


def quiescence_test(
    reservoir: Reservoir,
    length: int = Defaults.ESP_LENGTH,
    epsilon: float = Defaults.ESP_EPSILON,
    seed: int = 0,
) -> ConvergenceResult:
    """
    Drive with zero input from a random state and measure the per-step state change.

    A reservoir that relaxes to a quiescent state reports the first step at
    which consecutive states differ by less than epsilon.
    """
    if length < 1:
        raise DimensionError(f"quiescence test needs length >= 1, got {length}")
    rng = np.random.default_rng(seed)
    state = reservoir.random_state(rng)
    zero = np.zeros(reservoir.descriptor.input_dimension)
    changes = np.empty(length)
    for t in range(length):
        new_state, _ = reservoir.advance(state, zero)
        changes[t] = reservoir.state_distance(new_state, state)
        state = new_state
    return ConvergenceResult(
        step=_first_below(changes, epsilon),
        final_distance=float(changes[-1]),
        distances=changes,
    )


def kernel_rank(
    reservoir: Reservoir,
    streams: int = Defaults.KERNEL_STREAMS,
    length: int = Defaults.KERNEL_LENGTH,
    seed: int = 0,
    tolerance: float = Tolerance.KERNEL_RANK,
) -> int:
    """
    Numerical rank of the final observed states over distinct random input streams.

    Higher rank means distinct inputs are projected onto more independent
    directions, which is what makes a linear readout sufficient.
    """
    rng = np.random.default_rng(seed)
    low, high = reservoir.input_bounds or (0.0, 1.0)
    channels = reservoir.descriptor.input_dimension
    finals = np.empty((streams, reservoir.descriptor.readout_dimension))
    for s in range(streams):
        stream = TimeSeries(rng.uniform(low, high, size=(length, channels)))
        finals[s] = drive(reservoir, stream).states[-1]
    singular_values = np.linalg.svd(finals, compute_uv=False)
    if singular_values.size == 0 or singular_values[0] == 0.0:
        return 0
    return int(np.sum(singular_values > tolerance * singular_values[0]))


def run_diagnostics(
    reservoir: Reservoir,
    settings: DiagnosticsSettings,
    seed: int = 0,
    regularization: float = Defaults.REGULARIZATION,
) -> DiagnosticsReport:
    """
    Run the full diagnostics suite on one reservoir.

    Every random ingredient is derived from ``seed`` so the report is
    reproducible.
    """
    seed = settings.seed if settings.seed is not None else seed
    rng = np.random.default_rng(seed)
    low, high = reservoir.input_bounds or (0.0, 1.0)
    channels = reservoir.descriptor.input_dimension
    common = TimeSeries(rng.uniform(low, high, size=(settings.esp_length, channels)))
    other = TimeSeries(rng.uniform(low, high, size=(settings.esp_length, channels)))

    esp = echo_state_test(reservoir, common, settings.trials, settings.epsilon, seed=seed + 1)
    washout = settings.esp_length // 10
    separation = separation_test(reservoir, common, other, washout=washout)
    reproducibility = reproducibility_test(
        reservoir, common, settings.noise, settings.noise_trials, seed=seed + 2
    )
    profile = fading_memory_profile(
        reservoir, settings.max_delay, settings.memory_length, seed=seed + 3,
        regularization=regularization,
    )
    quiet = quiescence_test(reservoir, settings.esp_length, settings.epsilon, seed=seed + 4)
    rank = kernel_rank(reservoir, settings.kernel_streams, settings.kernel_length, seed=seed + 5)
    logger.info(
        f"Diagnostics: ESP step={esp.step}, separation={separation:.4g}, "
        f"reproducibility={reproducibility:.4g}, MC={profile.sum():.4g}, kernel rank={rank}"
    )
    return DiagnosticsReport(
        esp_convergence_step=esp.step,
        esp_final_distance=esp.final_distance,
        memory_profile=profile,
        memory_capacity=tasks_service.memory_capacity(profile),
        separation_score=separation,
        reproducibility_score=reproducibility,
        quiescence_step=quiet.step,
        quiescence_final_change=quiet.final_distance,
        kernel_rank=rank,
    )
