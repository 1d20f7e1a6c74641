"""
Readout service for Resonant.

The readout is the only trained component. It is an affine map fitted by
ridge regression on harvested states; the bias column (last column of the
design matrix) is left out of the penalty.
"""

import warnings
from typing import Mapping, Optional

import numpy as np
import scipy.linalg

from src.errors import DimensionError, SingularSystemError
from src.models import Readout, TimeSeries
from src.logging_utils import setup_logger

logger = setup_logger(__name__)


def _as_targets(targets: np.ndarray | TimeSeries) -> np.ndarray:
    data = targets.data if isinstance(targets, TimeSeries) else np.asarray(targets, dtype=float)
    if data.ndim == 1:
        data = data[:, None]
    return data


def fit(design: np.ndarray, targets: np.ndarray | TimeSeries, regularization: float) -> Readout:
    """
    Fit an affine readout by ridge regression.

    Solves ``(D^T D + lambda P) W^T = D^T Y`` with P the identity except a
    zero for the bias column, using a symmetric positive-definite solver.

    Args:
        design: Matrix of shape (R, K+1) whose last column is the constant 1.
        targets: Matrix of shape (R, m).
        regularization: lambda >= 0.

    Returns:
        The fitted Readout with weights of shape (m, K+1).

    Raises:
        DimensionError: On row mismatch or non-finite entries.
        SingularSystemError: When the system cannot be solved, typically
            lambda = 0 with a rank-deficient design.

    Example:
        >>> readout = fit(design, targets, regularization=1e-6)
        >>> readout.weights.shape
        (1, 101)
    """
    design = np.asarray(design, dtype=float)
    y = _as_targets(targets)
    if design.ndim != 2 or design.shape[0] < 1:
        raise DimensionError(f"design must be a non-empty matrix, got shape {design.shape}")
    if y.shape[0] != design.shape[0]:
        raise DimensionError(f"design has {design.shape[0]} rows, targets have {y.shape[0]}")
    if not (np.isfinite(design).all() and np.isfinite(y).all()):
        raise DimensionError("design and targets must be finite")
    if regularization < 0:
        raise DimensionError(f"regularization must be >= 0, got {regularization}")

    width = design.shape[1]
    if regularization == 0 and np.linalg.matrix_rank(design) < width:
        raise SingularSystemError(
            "design matrix is rank deficient with regularization 0; use regularization > 0"
        )
    gram = design.T @ design
    penalty = np.full(width, float(regularization))
    penalty[-1] = 0.0
    gram[np.diag_indices(width)] += penalty
    rhs = design.T @ y
    try:
        with warnings.catch_warnings():
            # ill-conditioning only matters without a penalty
            warnings.simplefilter("error" if regularization == 0 else "ignore", scipy.linalg.LinAlgWarning)
            solution = scipy.linalg.solve(gram, rhs, assume_a="pos")
    except (np.linalg.LinAlgError, scipy.linalg.LinAlgError, scipy.linalg.LinAlgWarning) as e:
        raise SingularSystemError(
            f"readout normal equations are singular ({e}); use regularization > 0"
        ) from e
    logger.debug(f"Fitted readout on {design.shape[0]} rows, width {width}, lambda={regularization}")
    return Readout(weights=solution.T, regularization=float(regularization))


def fit_readouts(
    design: np.ndarray,
    targets: Mapping[str, np.ndarray | TimeSeries],
    regularization: float,
) -> dict[str, Readout]:
    """
    Fit one readout per named target over the same design matrix.

    One driven trajectory serves any number of tasks; nothing is re-driven.
    """
    return {name: fit(design, target, regularization) for name, target in targets.items()}


def apply(readout: Readout, x_augmented: np.ndarray) -> np.ndarray:
    """
    Evaluate the readout on one augmented state vector or a design matrix.

    Args:
        readout: Fitted readout.
        x_augmented: Vector of length K+1 or matrix of shape (R, K+1).

    Returns:
        Output vector of length m, or matrix of shape (R, m).

    Raises:
        DimensionError: If the width does not match.
    """
    x = np.asarray(x_augmented, dtype=float)
    if x.shape[-1] != readout.width:
        raise DimensionError(f"readout expects width {readout.width}, got {x.shape[-1]}")
    if x.ndim == 1:
        return readout.weights @ x
    return x @ readout.weights.T


def residual(readout: Readout, design: np.ndarray, targets: np.ndarray | TimeSeries) -> float:
    """Sum of squared training errors."""
    return float(np.sum((apply(readout, design) - _as_targets(targets)) ** 2))


def nmse(predicted: np.ndarray | TimeSeries, target: np.ndarray | TimeSeries) -> float:
    """
    Mean squared error divided by target variance, averaged over channels.

    Raises:
        DimensionError: On shape mismatch or a zero-variance target channel.
    """
    p, y = _as_targets(predicted), _as_targets(target)
    if p.shape != y.shape:
        raise DimensionError(f"shape mismatch {p.shape} vs {y.shape}")
    variance = y.var(axis=0)
    if np.any(variance == 0):
        raise DimensionError("target has zero variance; NMSE is undefined")
    return float(np.mean(np.mean((p - y) ** 2, axis=0) / variance))


def r_squared(predicted: np.ndarray | TimeSeries, target: np.ndarray | TimeSeries) -> float:
    """Coefficient of determination 1 - NMSE, averaged over channels (may be negative)."""
    return 1.0 - nmse(predicted, target)


def rmse(predicted: np.ndarray | TimeSeries, target: np.ndarray | TimeSeries) -> float:
    p, y = _as_targets(predicted), _as_targets(target)
    if p.shape != y.shape:
        raise DimensionError(f"shape mismatch {p.shape} vs {y.shape}")
    return float(np.sqrt(np.mean((p - y) ** 2)))


def select_regularization(
    design: np.ndarray,
    targets: np.ndarray | TimeSeries,
    grid: tuple[float, ...],
    validation_fraction: float,
) -> tuple[float, Optional[float]]:
    """
    Pick lambda from a grid by validation NMSE on the trailing rows.

    Returns:
        The chosen lambda and its validation NMSE (None if no candidate
        could be fitted, in which case the largest lambda is returned).
    """
    y = _as_targets(targets)
    rows = design.shape[0]
    split = rows - max(1, int(round(rows * validation_fraction)))
    if split < 1:
        raise DimensionError("not enough rows to hold out a validation segment")
    best: tuple[float, Optional[float]] = (max(grid), None)
    for candidate in grid:
        try:
            readout = fit(design[:split], y[:split], candidate)
            score = nmse(apply(readout, design[split:]), y[split:])
        except (SingularSystemError, DimensionError) as e:
            logger.warning(f"Skipping lambda={candidate}: {e}")
            continue
        if best[1] is None or score < best[1]:
            best = (candidate, score)
    logger.info(f"Selected lambda={best[0]} (validation NMSE {best[1]})")
    return best
