"""
Echo state network service for Resonant.

This module generates random, fixed recurrent networks and implements the
leaky-integrator update

    x' = (1 - alpha) x + alpha g(W x + W_in u + b)

used as the classical reservoir backend. Generation is fully determined by
the config seed; nothing here is ever trained.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.linalg
import scipy.sparse.linalg

from src.config import (
    ARNOLDI_MAX_STEPS,
    Defaults,
    EIGVALS_MAX_NODES,
    ESN_MAX_DRAWS,
    Tolerance,
)
from src.errors import DimensionError, GenerationError, NumericalError
from src.models import EsnConfig, Nonlinearity, ReservoirDescriptor, ReservoirKind
from src.logging_utils import setup_logger

logger = setup_logger(__name__)

_ACTIVATIONS = {
    Nonlinearity.TANH: np.tanh,
    Nonlinearity.IDENTITY: lambda z: z,
}


@dataclass(frozen=True, eq=False)
class EsnReservoir:
    """
    A generated echo state network.

    Attributes:
        W: Recurrent weights, shape (K, K).
        W_in: Input weights, shape (K, n).
        b: Bias, shape (K,).
        leak_rate: Leaky-integrator rate alpha.
        nonlinearity: Activation function g.
        config: The config it was generated from.
    """

    W: np.ndarray
    W_in: np.ndarray
    b: np.ndarray
    leak_rate: float = 1.0
    nonlinearity: Nonlinearity = Nonlinearity.TANH
    config: Optional[EsnConfig] = None

    def __post_init__(self) -> None:
        W = np.array(self.W, dtype=float)
        W_in = np.array(self.W_in, dtype=float)
        b = np.array(self.b, dtype=float).reshape(-1)
        if W_in.ndim == 1:
            W_in = W_in[:, None]
        nodes = W.shape[0]
        if W.shape != (nodes, nodes) or W_in.shape[0] != nodes or b.shape != (nodes,):
            raise DimensionError(
                f"inconsistent ESN shapes W={W.shape}, W_in={W_in.shape}, b={b.shape}"
            )
        for name, value in (("W", W), ("W_in", W_in), ("b", b)):
            value.setflags(write=False)
            object.__setattr__(self, name, value)
        object.__setattr__(self, "nonlinearity", Nonlinearity(self.nonlinearity))

    @property
    def nodes(self) -> int:
        return self.W.shape[0]

    @property
    def input_dim(self) -> int:
        return self.W_in.shape[1]

    @property
    def descriptor(self) -> ReservoirDescriptor:
        return ReservoirDescriptor(
            kind=ReservoirKind.CLASSICAL_ESN,
            readout_dimension=self.nodes,
            state_dimension=self.nodes,
            input_dimension=self.input_dim,
        )

    @property
    def input_bounds(self) -> Optional[tuple[float, float]]:
        return None

    def initial_state(self) -> np.ndarray:
        return np.zeros(self.nodes)

    def random_state(self, rng: np.random.Generator) -> np.ndarray:
        return rng.uniform(-1.0, 1.0, size=self.nodes)

    def advance(self, state: np.ndarray, u: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        new_state = step(self, state, u)
        return new_state, observed_state(new_state)

    def state_distance(self, a: np.ndarray, b: np.ndarray) -> float:
        return float(np.linalg.norm(a - b))


def sparse_spectral_radius(
    matrix: np.ndarray,
    tol: float = Tolerance.ARNOLDI,
    max_steps: int = ARNOLDI_MAX_STEPS,
    seed: int = 0,
) -> float:
    """
    Largest eigenvalue magnitude by implicitly restarted Arnoldi (ARPACK).

    Handles complex-conjugate dominant pairs. The starting vector is drawn from seed so repeated calls
    give the same value.

    Raises:
        NumericalError: If ARPACK does not converge within max_steps.
    """
    n = matrix.shape[0]
    if not np.any(matrix):
        return 0.0
    if n < 3:
        return float(np.max(np.abs(scipy.linalg.eigvals(matrix))))
    v0 = np.random.default_rng(seed).standard_normal(n)
    try:
        eigenvalues = scipy.sparse.linalg.eigs(
            matrix, k=1, which="LM", v0=v0, tol=tol, maxiter=max_steps,
            return_eigenvectors=False,
        )
    except scipy.sparse.linalg.ArpackNoConvergence as e:
        raise NumericalError(f"spectral radius did not converge in {max_steps} iterations") from e
    return float(np.abs(eigenvalues[0]))


def spectral_radius(matrix: np.ndarray) -> float:
    """
    Largest eigenvalue magnitude of a square matrix.

    Dense eigenvalues are used up to EIGVALS_MAX_NODES rows, ARPACK
    beyond.
    """
    if matrix.shape[0] <= EIGVALS_MAX_NODES:
        return float(np.max(np.abs(scipy.linalg.eigvals(matrix))))
    return sparse_spectral_radius(matrix)


def _draw(config: EsnConfig, seed: int, attempt: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    rng = np.random.default_rng([seed, attempt])
    k, n = config.nodes, config.input_dim
    W = rng.uniform(-1.0, 1.0, size=(k, k))
    if config.connectivity < 1.0:
        mask = rng.random((k, k)) < config.connectivity
        W = W * mask
    W_in = rng.uniform(-config.input_scaling, config.input_scaling, size=(k, n))
    bias_range = Defaults.ESN_BIAS_FRACTION * config.input_scaling
    b = rng.uniform(-bias_range, bias_range, size=k)
    return W, W_in, b


def generate(config: EsnConfig, seed: Optional[int] = None) -> EsnReservoir:
    """
    Generate a random echo state network.

    W is drawn sparse with the configured connectivity, entries uniform on
    [-1, 1], then rescaled to the configured spectral radius. A draw whose
    spectral radius is zero is redrawn with an incremented draw counter.

    Args:
        config: Generation parameters.
        seed: Overrides config.seed when given.

    Returns:
        The generated reservoir.

    Raises:
        ConfigError: If the config is invalid.
        GenerationError: If ESN_MAX_DRAWS draws all have zero spectral radius.

    Example:
        >>> esn = generate(EsnConfig(nodes=100, spectral_radius=0.9, seed=1))
        >>> round(spectral_radius(esn.W), 6)
        0.9
    """
    config.validate()
    seed = config.seed if seed is None else seed
    if seed is None:
        seed = 0
    for attempt in range(ESN_MAX_DRAWS):
        W, W_in, b = _draw(config, seed, attempt)
        radius = spectral_radius(W)
        if radius > 0.0:
            W = W * (config.spectral_radius / radius)
            logger.info(
                f"Generated ESN with {config.nodes} nodes (seed={seed}, draw={attempt}, "
                f"raw radius={radius:.4f})"
            )
            return EsnReservoir(
                W=W,
                W_in=W_in,
                b=b,
                leak_rate=config.leak_rate,
                nonlinearity=config.nonlinearity,
                config=config,
            )
        logger.warning(f"ESN draw {attempt} for seed {seed} has zero spectral radius, redrawing")
    raise GenerationError(
        f"no ESN draw with nonzero spectral radius after {ESN_MAX_DRAWS} attempts (seed={seed})"
    )


def step(reservoir: EsnReservoir, x: np.ndarray, u: np.ndarray) -> np.ndarray:
    """
    One leaky-integrator update.

    Args:
        reservoir: The network.
        x: Current state, shape (K,).
        u: Input, shape (n,).

    Returns:
        ``(1 - alpha) x + alpha g(W x + W_in u + b)``.

    Raises:
        DimensionError: If x or u has the wrong length.
    """
    x = np.asarray(x, dtype=float)
    u = np.atleast_1d(np.asarray(u, dtype=float))
    if x.shape != (reservoir.nodes,):
        raise DimensionError(f"state has shape {x.shape}, expected ({reservoir.nodes},)")
    if u.shape != (reservoir.input_dim,):
        raise DimensionError(f"input has shape {u.shape}, expected ({reservoir.input_dim},)")
    g = _ACTIVATIONS[reservoir.nonlinearity]
    pre_activation = reservoir.W @ x + reservoir.W_in @ u + reservoir.b
    alpha = reservoir.leak_rate
    return (1.0 - alpha) * x + alpha * g(pre_activation)


def observed_state(x: np.ndarray) -> np.ndarray:
    """All ESN state variables are observable."""
    return np.asarray(x, dtype=float)
