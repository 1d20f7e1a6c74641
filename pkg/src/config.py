"""
Configuration module for Resonant.

This module contains all configuration constants, paths, numerical
tolerances and defaults used throughout the toolkit. Centralizing them
makes it easy to tune behavior without changing code in multiple places.
"""

import os
from pathlib import Path
from typing import Final

# Base paths
PROJECT_ROOT: Final[Path] = Path(__file__).parent.parent
CONTENT_DIR: Final[Path] = PROJECT_ROOT / "content"
DEFAULT_OUTPUT_DIR: Final[str] = "results"  # relative to the working directory

# Application settings
APP_TITLE: Final[str] = "Resonant"
APP_SUBTITLE: Final[str] = "Reservoir computing with echo state networks and quantum reservoirs"


# Experiment defaults
class Defaults:
    """Default values applied when a config section leaves a field out."""

    REGULARIZATION: Final[float] = 1e-6
    TRAIN_FRACTION: Final[float] = 0.7
    WASHOUT_FRACTION: Final[float] = 0.1  # of the training length
    VALIDATION_FRACTION: Final[float] = 0.2  # of the post-washout training rows
    WORKERS: Final[int] = 1
    BACKEND_SEED_OFFSET: Final[int] = 1

    # Echo state network
    ESN_NODES: Final[int] = 100
    ESN_SPECTRAL_RADIUS: Final[float] = 0.9
    ESN_INPUT_SCALING: Final[float] = 1.0
    ESN_CONNECTIVITY: Final[float] = 1.0
    ESN_LEAK_RATE: Final[float] = 1.0
    ESN_BIAS_FRACTION: Final[float] = 0.1  # bias range relative to input scaling

    # Quantum reservoir
    QRC_QUBITS: Final[int] = 5
    QRC_TAU: Final[float] = 1.0
    QRC_VIRTUAL_NODES: Final[int] = 10
    QRC_COUPLING_SCALE: Final[float] = 1.0
    QRC_FIELD: Final[float] = 1.0

    # Tasks
    TASK_LENGTH: Final[int] = 2000
    SINE_PERIOD: Final[float] = 50.0

    # Diagnostics
    ESP_TRIALS: Final[int] = 2
    ESP_EPSILON: Final[float] = 1e-6
    ESP_LENGTH: Final[int] = 500
    MAX_DELAY: Final[int] = 40
    MEMORY_LENGTH: Final[int] = 2000
    NOISE_AMPLITUDE: Final[float] = 1e-3
    NOISE_TRIALS: Final[int] = 5
    KERNEL_STREAMS: Final[int] = 50
    KERNEL_LENGTH: Final[int] = 100


# Numerical tolerances
class Tolerance:
    """Numerical tolerances shared by the linear algebra and reservoir code."""

    HERMITIAN: Final[float] = 1e-12
    STATE_HERMITIAN: Final[float] = 1e-10
    STATE_TRACE: Final[float] = 1e-10
    STATE_PSD: Final[float] = 1e-8
    IMAGINARY_RESIDUE: Final[float] = 1e-10
    ARNOLDI: Final[float] = 1e-13
    KERNEL_RANK: Final[float] = 1e-8


# Hard limits
ARNOLDI_MAX_STEPS: Final[int] = 10_000
EIGVALS_MAX_NODES: Final[int] = 2000
ESN_MAX_DRAWS: Final[int] = 8
QRC_MAX_QUBITS: Final[int] = 12
QRC_PSD_CHECK_INTERVAL: Final[int] = 100
NARMA_ORDER: Final[int] = 10
NARMA_DIVERGENCE_BOUND: Final[float] = 10.0
NARMA_MAX_REGENERATIONS: Final[int] = 100

# Mackey-Glass integration
MACKEY_GLASS_DELAY: Final[float] = 17.0
MACKEY_GLASS_DT: Final[float] = 1.0
MACKEY_GLASS_TRANSIENT: Final[int] = 1000
MACKEY_GLASS_HISTORY: Final[float] = 1.2

# Persistence formats
BUNDLE_FORMAT_VERSION: Final[int] = 1
CSV_FLOAT_FORMAT: Final[str] = "%.17g"
NONE_SENTINEL: Final[str] = "none"

METRICS_FILE: Final[str] = "metrics.csv"
PREDICTIONS_FILE: Final[str] = "predictions.csv"
STATES_FILE: Final[str] = "states.csv"
DIAGNOSTICS_FILE: Final[str] = "diagnostics.csv"
MEMORY_PROFILE_FILE: Final[str] = "memory_profile.csv"
TASK_FILE: Final[str] = "task.csv"

DIAGNOSTICS_COLUMNS: Final[list[str]] = [
    "esp_convergence_step",
    "esp_final_distance",
    "separation_score",
    "reproducibility_score",
    "memory_capacity",
    "quiescence_step",
    "quiescence_final_change",
    "kernel_rank",
]

# Logging configuration
LOG_LEVEL: Final[str] = os.getenv("LOG_LEVEL", "INFO")
LOG_FORMAT: Final[str] = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
LOG_DATE_FORMAT: Final[str] = "%Y-%m-%d %H:%M:%S"
