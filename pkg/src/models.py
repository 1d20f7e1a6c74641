"""
Data models for Resonant.

This module contains the dataclass definitions for the entities used
throughout the toolkit: signals, state trajectories, backend configs,
readouts, task descriptions, diagnostics reports and experiment configs.
These models provide type safety and validate their own invariants.
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

import numpy as np

from src.config import DEFAULT_OUTPUT_DIR, Defaults, QRC_MAX_QUBITS, Tolerance
from src.errors import ConfigError, DimensionError, NonFiniteInputError, NumericalError


def _first_non_finite_row(data: np.ndarray) -> Optional[int]:
    bad = ~np.isfinite(data).all(axis=1)
    if bad.any():
        return int(np.argmax(bad))
    return None


@dataclass(frozen=True)
class TimeSeries:
    """
    Ordered real-valued samples, one row per step.

    Attributes:
        data: Array of shape (T, d) with T steps and d channels.
        dt: Nominal step spacing (metadata only).
    """

    data: np.ndarray
    dt: float = 1.0

    def __post_init__(self) -> None:
        data = np.array(self.data, dtype=float)
        if data.ndim == 1:
            data = data[:, None]
        if data.ndim != 2 or data.shape[0] < 1 or data.shape[1] < 1:
            raise DimensionError(f"time series needs shape (T>=1, d>=1), got {data.shape}")
        bad_step = _first_non_finite_row(data)
        if bad_step is not None:
            raise NonFiniteInputError(bad_step)
        data.setflags(write=False)
        object.__setattr__(self, "data", data)

    @property
    def length(self) -> int:
        return self.data.shape[0]

    @property
    def channels(self) -> int:
        return self.data.shape[1]

    def __len__(self) -> int:
        return self.length

    def segment(self, start: int, stop: Optional[int] = None) -> "TimeSeries":
        """Return the contiguous steps [start, stop) as a new series."""
        return TimeSeries(self.data[start:stop], self.dt)

    def concat(self, other: "TimeSeries") -> "TimeSeries":
        """Append another series with the same channel count."""
        if other.channels != self.channels:
            raise DimensionError(
                f"cannot concatenate {self.channels}-channel and {other.channels}-channel series"
            )
        return TimeSeries(np.vstack([self.data, other.data]), self.dt)


@dataclass(frozen=True)
class StateTrajectory:
    """
    Observed reservoir states harvested while driving, one row per input step.

    Attributes:
        states: Array of shape (T, K).
        washout: Number of leading steps excluded from training.
    """

    states: np.ndarray
    washout: int = 0

    def __post_init__(self) -> None:
        states = np.array(self.states, dtype=float)
        if states.ndim != 2 or states.shape[0] < 1:
            raise DimensionError(f"trajectory needs shape (T>=1, K), got {states.shape}")
        if not 0 <= self.washout < states.shape[0]:
            raise DimensionError(
                f"washout {self.washout} outside [0, {states.shape[0]})"
            )
        if not np.isfinite(states).all():
            raise DimensionError("trajectory contains non-finite states")
        states.setflags(write=False)
        object.__setattr__(self, "states", states)

    @property
    def length(self) -> int:
        return self.states.shape[0]

    @property
    def dimension(self) -> int:
        return self.states.shape[1]


class ReservoirKind(str, Enum):
    """Backend family of a reservoir."""

    CLASSICAL_ESN = "classical-esn"
    QUANTUM = "quantum"


@dataclass(frozen=True)
class ReservoirDescriptor:
    """
    Uniform handle describing any backend.

    Attributes:
        kind: Backend family.
        readout_dimension: Number of observed signals per step (true nodes).
        state_dimension: Size of the full internal state.
        input_dimension: Channels the backend accepts per step.
    """

    kind: ReservoirKind
    readout_dimension: int
    state_dimension: int
    input_dimension: int = 1

    def __post_init__(self) -> None:
        if self.readout_dimension < 1 or self.state_dimension < 1:
            raise DimensionError("descriptor dimensions must be positive")
        if self.kind is ReservoirKind.CLASSICAL_ESN and self.readout_dimension > self.state_dimension:
            raise DimensionError("classical readout cannot observe more than the state")

    @property
    def hidden_dimension(self) -> int:
        """Count of state variables that are never observed."""
        return max(self.state_dimension - self.readout_dimension, 0)


class Nonlinearity(str, Enum):
    """Elementwise activation of the echo state network update."""

    TANH = "tanh"
    IDENTITY = "identity"


@dataclass(frozen=True)
class EsnConfig:
    """
    Generation parameters of a classical echo state network.

    Attributes:
        nodes: Reservoir size K.
        input_dim: Input channels n.
        spectral_radius: Target spectral radius of the recurrent matrix.
        input_scaling: Half-width of the uniform input weight range.
        connectivity: Fraction of nonzero recurrent weights, in (0, 1].
        leak_rate: Leaky-integrator rate alpha, in (0, 1].
        seed: Generation seed; None means "derive from the global seed".
        nonlinearity: Activation function.
    """

    nodes: int = Defaults.ESN_NODES
    input_dim: int = 1
    spectral_radius: float = Defaults.ESN_SPECTRAL_RADIUS
    input_scaling: float = Defaults.ESN_INPUT_SCALING
    connectivity: float = Defaults.ESN_CONNECTIVITY
    leak_rate: float = Defaults.ESN_LEAK_RATE
    seed: Optional[int] = None
    nonlinearity: Nonlinearity = Nonlinearity.TANH

    def validate(self) -> None:
        """Raise ConfigError if any invariant is violated."""
        if self.nodes < 1:
            raise ConfigError(f"esn.nodes must be >= 1, got {self.nodes}")
        if self.input_dim < 1:
            raise ConfigError(f"esn.input_dim must be >= 1, got {self.input_dim}")
        if not self.spectral_radius > 0:
            raise ConfigError(f"esn.spectral_radius must be > 0, got {self.spectral_radius}")
        if not self.input_scaling > 0:
            raise ConfigError(f"esn.input_scaling must be > 0, got {self.input_scaling}")
        if not 0 < self.connectivity <= 1:
            raise ConfigError(f"esn.connectivity must be in (0, 1], got {self.connectivity}")
        if not 0 < self.leak_rate <= 1:
            raise ConfigError(f"esn.leak_rate must be in (0, 1], got {self.leak_rate}")


@dataclass(frozen=True)
class QrcConfig:
    """
    Parameters of the quantum reservoir.

    Attributes:
        qubits: Number of qubits N.
        tau: Evolution time per input step (units of 1/J).
        virtual_nodes: Sub-interval count V for temporal multiplexing.
        coupling_scale: J, couplings are drawn uniform on [-J/2, J/2].
        field: Transverse field strength h.
        seed: Coupling seed; None means "derive from the global seed".
    """

    qubits: int = Defaults.QRC_QUBITS
    tau: float = Defaults.QRC_TAU
    virtual_nodes: int = Defaults.QRC_VIRTUAL_NODES
    coupling_scale: float = Defaults.QRC_COUPLING_SCALE
    field: float = Defaults.QRC_FIELD
    seed: Optional[int] = None

    def validate(self) -> None:
        """Raise ConfigError if any invariant is violated."""
        if not 1 <= self.qubits <= QRC_MAX_QUBITS:
            raise ConfigError(f"qrc.qubits must be in [1, {QRC_MAX_QUBITS}], got {self.qubits}")
        if self.virtual_nodes < 1:
            raise ConfigError(f"qrc.virtual_nodes must be >= 1, got {self.virtual_nodes}")
        if not self.tau > 0:
            raise ConfigError(f"qrc.tau must be > 0, got {self.tau}")


@dataclass(frozen=True)
class DensityMatrix:
    """
    Quantum state of N qubits as a 2^N x 2^N complex matrix.

    Construction does not validate; call validate() at trust boundaries.
    Qubit 1 is the most significant bit of the basis index.
    """

    matrix: np.ndarray

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def num_qubits(self) -> int:
        return int(self.dim).bit_length() - 1

    def trace(self) -> complex:
        return complex(np.trace(self.matrix))

    def hermiticity_error(self) -> float:
        return float(np.max(np.abs(self.matrix - self.matrix.conj().T)))

    def min_eigenvalue(self) -> float:
        hermitian_part = 0.5 * (self.matrix + self.matrix.conj().T)
        return float(np.linalg.eigvalsh(hermitian_part)[0])

    def validate(
        self,
        hermitian_tol: float = Tolerance.STATE_HERMITIAN,
        trace_tol: float = Tolerance.STATE_TRACE,
        psd_tol: Optional[float] = Tolerance.STATE_PSD,
    ) -> None:
        """
        Check Hermiticity, unit trace and (optionally) positivity.

        Raises:
            NumericalError: If any check fails.
        """
        if self.matrix.ndim != 2 or self.matrix.shape[0] != self.matrix.shape[1]:
            raise NumericalError(f"density matrix must be square, got {self.matrix.shape}")
        herm = self.hermiticity_error()
        if herm > hermitian_tol:
            raise NumericalError(f"density matrix not Hermitian (deviation {herm:.3e})")
        trace = self.trace()
        if abs(trace - 1.0) > trace_tol:
            raise NumericalError(f"density matrix trace {trace.real:.15f} deviates from 1")
        if psd_tol is not None:
            lowest = self.min_eigenvalue()
            if lowest < -psd_tol:
                raise NumericalError(f"density matrix not positive (min eigenvalue {lowest:.3e})")


@dataclass(frozen=True)
class Readout:
    """
    Trained affine readout.

    Attributes:
        weights: Array of shape (m, K+1); the last column multiplies the constant 1.
        regularization: Ridge penalty used at fit time.
    """

    weights: np.ndarray
    regularization: float = 0.0

    def __post_init__(self) -> None:
        weights = np.atleast_2d(np.array(self.weights, dtype=float))
        if not np.isfinite(weights).all():
            raise DimensionError("readout weights must be finite")
        weights.setflags(write=False)
        object.__setattr__(self, "weights", weights)

    @property
    def outputs(self) -> int:
        return self.weights.shape[0]

    @property
    def width(self) -> int:
        return self.weights.shape[1]


@dataclass(frozen=True)
class Normalization:
    """
    Per-channel affine map x -> (x - offset) / scale onto [0, 1].

    Attributes:
        offset: Per-channel minimum of the realized series.
        scale: Per-channel range (1.0 for degenerate channels).
    """

    offset: tuple[float, ...]
    scale: tuple[float, ...]

    @classmethod
    def fit(cls, data: np.ndarray) -> "Normalization":
        """Record the min/max map of a realized series."""
        data = np.asarray(data, dtype=float)
        if data.ndim == 1:
            data = data[:, None]
        low = data.min(axis=0)
        span = data.max(axis=0) - low
        span = np.where(span > 0, span, 1.0)
        return cls(tuple(float(v) for v in low), tuple(float(v) for v in span))

    @classmethod
    def identity(cls, channels: int) -> "Normalization":
        return cls((0.0,) * channels, (1.0,) * channels)

    def apply(self, series: TimeSeries) -> TimeSeries:
        data = (series.data - np.asarray(self.offset)) / np.asarray(self.scale)
        return TimeSeries(data, series.dt)

    def invert(self, series: TimeSeries) -> TimeSeries:
        data = series.data * np.asarray(self.scale) + np.asarray(self.offset)
        return TimeSeries(data, series.dt)


class TaskKind(str, Enum):
    """Available benchmark tasks."""

    NARMA10 = "narma10"
    DELAY_MEMORY = "delay-memory"
    SINE_PREDICTION = "sine-prediction"
    MACKEY_GLASS = "mackey-glass"


@dataclass(frozen=True)
class TaskSpec:
    """
    Benchmark task description.

    Attributes:
        kind: Which generator to use.
        length: Number of samples T.
        horizon: Prediction horizon (sine, Mackey-Glass).
        delay: Recall delay (delay memory).
        period: Sine period in steps.
        seed: Generation seed; None means "use the global seed".
    """

    kind: TaskKind = TaskKind.SINE_PREDICTION
    length: int = Defaults.TASK_LENGTH
    horizon: int = 1
    delay: int = 1
    period: float = Defaults.SINE_PERIOD
    seed: Optional[int] = None

    def validate(self) -> None:
        """Raise ConfigError if the task cannot be generated."""
        if self.length < 1:
            raise ConfigError(f"task.length must be >= 1, got {self.length}")
        if self.horizon < 0 or self.delay < 0:
            raise ConfigError("task.horizon and task.delay must be >= 0")
        if self.kind is TaskKind.NARMA10 and self.length <= 10:
            raise ConfigError("narma10 needs task.length > 10")
        if self.kind is TaskKind.DELAY_MEMORY and self.length <= self.delay:
            raise ConfigError("delay-memory needs task.length > task.delay")
        if self.kind is TaskKind.SINE_PREDICTION:
            if self.length <= self.horizon:
                raise ConfigError("sine-prediction needs task.length > task.horizon")
            if not self.period > 0:
                raise ConfigError("task.period must be > 0")


@dataclass(frozen=True)
class TaskData:
    """
    Generated (input, target) pair together with its realized normalization.

    Attributes:
        spec: The spec the data was generated from.
        input: Raw input series.
        target: Raw target series.
        input_normalization: Map taking the raw input onto [0, 1].
        target_normalization: Map taking the raw target onto [0, 1].
        seed_used: Seed that produced the accepted realization.
        regenerations: Number of rejected realizations (NARMA divergence guard).
    """

    spec: TaskSpec
    input: TimeSeries
    target: TimeSeries
    input_normalization: Normalization
    target_normalization: Normalization
    seed_used: Optional[int] = None
    regenerations: int = 0


@dataclass
class DiagnosticsReport:
    """
    Measured reservoir-quality criteria.

    Attributes:
        esp_convergence_step: First step with all trial states within epsilon, or None.
        esp_final_distance: Largest pairwise trial distance at the last step.
        memory_profile: Test r^2 per delay 1..D, clamped to [0, 1].
        memory_capacity: Sum of the profile.
        separation_score: Normalized distance between trajectories of differing inputs.
        reproducibility_score: State sensitivity to small input noise.
        quiescence_step: First step where the zero-input state change fell below epsilon, or None.
        quiescence_final_change: Per-step state change at the last zero-input step.
        kernel_rank: Numerical rank of final states over distinct input streams.
    """

    esp_convergence_step: Optional[int]
    esp_final_distance: float
    memory_profile: np.ndarray
    memory_capacity: float
    separation_score: float
    reproducibility_score: float
    quiescence_step: Optional[int] = None
    quiescence_final_change: float = 0.0
    kernel_rank: int = 0


@dataclass(frozen=True)
class ReadoutSettings:
    """Readout section of an experiment config."""

    regularization: float = Defaults.REGULARIZATION
    include_input: bool = False
    regularization_grid: tuple[float, ...] = ()


@dataclass(frozen=True)
class ExperimentSettings:
    """Protocol section of an experiment config."""

    washout: Optional[int] = None
    train_fraction: float = Defaults.TRAIN_FRACTION
    workers: int = Defaults.WORKERS


@dataclass(frozen=True)
class OutputSettings:
    """Where and what to write."""

    directory: str = DEFAULT_OUTPUT_DIR
    emit_states: bool = False


@dataclass(frozen=True)
class DiagnosticsSettings:
    """Parameters of the diagnostics suite."""

    trials: int = Defaults.ESP_TRIALS
    epsilon: float = Defaults.ESP_EPSILON
    esp_length: int = Defaults.ESP_LENGTH
    max_delay: int = Defaults.MAX_DELAY
    memory_length: int = Defaults.MEMORY_LENGTH
    noise: float = Defaults.NOISE_AMPLITUDE
    noise_trials: int = Defaults.NOISE_TRIALS
    kernel_streams: int = Defaults.KERNEL_STREAMS
    kernel_length: int = Defaults.KERNEL_LENGTH
    seed: Optional[int] = None

    def validate(self) -> None:
        """Raise ConfigError if a diagnostics parameter is out of range."""
        if self.trials < 2:
            raise ConfigError(f"diagnostics.trials must be >= 2, got {self.trials}")
        if not self.epsilon > 0:
            raise ConfigError(f"diagnostics.epsilon must be > 0, got {self.epsilon}")
        for name in ("esp_length", "max_delay", "noise_trials", "kernel_streams", "kernel_length"):
            value = getattr(self, name)
            if value < 1:
                raise ConfigError(f"diagnostics.{name} must be >= 1, got {value}")
        if self.memory_length <= self.max_delay:
            raise ConfigError(
                f"diagnostics.memory_length ({self.memory_length}) must exceed "
                f"diagnostics.max_delay ({self.max_delay})"
            )
        if self.noise < 0:
            raise ConfigError(f"diagnostics.noise must be >= 0, got {self.noise}")


@dataclass(frozen=True)
class SweepDeclaration:
    """One swept parameter, e.g. ("esn.spectral_radius", (0.5, 0.9, 1.2))."""

    parameter: str
    values: tuple


@dataclass(frozen=True)
class ExperimentConfig:
    """
    Complete experiment description, exactly one backend section set.
    """

    task: TaskSpec = field(default_factory=TaskSpec)
    esn: Optional[EsnConfig] = None
    qrc: Optional[QrcConfig] = None
    readout: ReadoutSettings = field(default_factory=ReadoutSettings)
    experiment: ExperimentSettings = field(default_factory=ExperimentSettings)
    sweeps: tuple[SweepDeclaration, ...] = ()
    output: OutputSettings = field(default_factory=OutputSettings)
    diagnostics: DiagnosticsSettings = field(default_factory=DiagnosticsSettings)
    seed: int = 0

    @property
    def backend_name(self) -> str:
        return "esn" if self.esn is not None else "qrc"

    def validate(self) -> None:
        """Raise ConfigError if the config is inconsistent."""
        if (self.esn is None) == (self.qrc is None):
            raise ConfigError("exactly one backend section (esn or qrc) is required")
        if self.esn is not None:
            self.esn.validate()
        if self.qrc is not None:
            self.qrc.validate()
        self.task.validate()
        if not 0 < self.experiment.train_fraction < 1:
            raise ConfigError(
                f"experiment.train_fraction must be in (0, 1), got {self.experiment.train_fraction}"
            )
        if self.experiment.washout is not None and self.experiment.washout < 0:
            raise ConfigError("experiment.washout must be >= 0")
        if self.experiment.workers < 1:
            raise ConfigError("experiment.workers must be >= 1")
        if self.readout.regularization < 0 or any(v < 0 for v in self.readout.regularization_grid):
            raise ConfigError("readout regularization must be >= 0")
        self.diagnostics.validate()


@dataclass(frozen=True)
class ModelBundle:
    """
    Everything needed to rebuild a trained model.

    The reservoir itself is not stored: its config and seed regenerate it.
    """

    backend: str
    backend_config: EsnConfig | QrcConfig
    readout: Readout
    include_input: bool
    input_normalization: Normalization
    target_normalization: Normalization
    format_version: int = 1
