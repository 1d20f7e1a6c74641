"""
Quantum reservoir service for Resonant.

This module simulates a register of N qubits as a density matrix driven by
a fully connected transverse-field Ising Hamiltonian

    H = sum_{i<j} J_ij X_i X_j + h sum_i Z_i,   J_ij ~ U[-J/2, J/2].

Each input sample u_k in [0, 1] replaces the first qubit by
|psi> = sqrt(1 - u_k)|0> + sqrt(u_k)|1> (rho <- rho_u (x) Tr_1 rho), then the
register evolves for tau in V equal slices. After every slice the Pauli-Z
expectation of each qubit is recorded, giving N*V observed signals per step
(virtual-node-major order).
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from src.config import QRC_PSD_CHECK_INTERVAL, Tolerance
from src.errors import DimensionError, NumericalError
from src.models import (
    DensityMatrix,
    QrcConfig,
    ReservoirDescriptor,
    ReservoirKind,
    StateTrajectory,
    TimeSeries,
)
from src.services.reservoir_service import check_input
from src.utils.qlinalg import (
    HermitianOperator,
    PAULI_X,
    PAULI_Z,
    embed_single_qubit,
    kron,
    partial_trace_first_qubit,
    trace_inner,
    unitary_from_hamiltonian,
)
from src.logging_utils import setup_logger

logger = setup_logger(__name__)


@dataclass(frozen=True, eq=False)
class QrcReservoir:
    """
    A built quantum reservoir.

    Attributes:
        config: Parameters it was built from.
        hamiltonian: The Ising Hamiltonian H.
        couplings: Upper-triangular J_ij used in H.
        step_unitary: exp(-i H tau / V).
        observables: Z_i embedded at every site i = 1..N.
    """

    config: QrcConfig
    hamiltonian: HermitianOperator
    couplings: np.ndarray
    step_unitary: np.ndarray
    observables: tuple[HermitianOperator, ...]

    @property
    def num_qubits(self) -> int:
        return self.config.qubits

    @property
    def dim(self) -> int:
        return 2 ** self.config.qubits

    @property
    def descriptor(self) -> ReservoirDescriptor:
        return ReservoirDescriptor(
            kind=ReservoirKind.QUANTUM,
            readout_dimension=self.config.qubits * self.config.virtual_nodes,
            state_dimension=self.dim * self.dim,
            input_dimension=1,
        )

    @property
    def input_bounds(self) -> Optional[tuple[float, float]]:
        return (0.0, 1.0)

    def initial_state(self) -> DensityMatrix:
        return maximally_mixed(self.num_qubits)

    def random_state(self, rng: np.random.Generator) -> DensityMatrix:
        """Random diagonal mixture of computational basis states."""
        weights = rng.dirichlet(np.ones(self.dim))
        return DensityMatrix(np.diag(weights).astype(complex))

    def advance(self, state: DensityMatrix, u: np.ndarray) -> tuple[DensityMatrix, np.ndarray]:
        return qrc_step(self, state, float(np.asarray(u).reshape(-1)[0]))

    def state_distance(self, a: DensityMatrix, b: DensityMatrix) -> float:
        return float(np.linalg.norm(a.matrix - b.matrix))


def maximally_mixed(num_qubits: int) -> DensityMatrix:
    """The state I / 2^N."""
    dim = 2 ** num_qubits
    return DensityMatrix(np.eye(dim, dtype=complex) / dim)


def ising_hamiltonian(
    couplings: np.ndarray, field: float, num_qubits: int
) -> HermitianOperator:
    """
    Assemble sum_{i<j} J_ij X_i X_j + h sum_i Z_i.

    Args:
        couplings: (N, N) array; only the strict upper triangle is read.
        field: h.
        num_qubits: N.
    """
    dim = 2 ** num_qubits
    h = np.zeros((dim, dim), dtype=complex)
    x_ops = [embed_single_qubit(PAULI_X, i, num_qubits) for i in range(num_qubits)]
    for i in range(num_qubits):
        h += field * embed_single_qubit(PAULI_Z, i, num_qubits)
        for j in range(i + 1, num_qubits):
            h += couplings[i, j] * (x_ops[i] @ x_ops[j])
    return HermitianOperator(h)


def build(config: QrcConfig, seed: Optional[int] = None) -> QrcReservoir:
    """
    Build a quantum reservoir from its config.

    Args:
        config: Reservoir parameters.
        seed: Overrides config.seed when given.

    Returns:
        The reservoir with its step unitary precomputed for tau / V.

    Raises:
        ConfigError: If the qubit count is outside [1, QRC_MAX_QUBITS] or
            another parameter is invalid.

    Example:
        >>> reservoir = build(QrcConfig(qubits=1, field=1.0, seed=0))
        >>> reservoir.hamiltonian.matrix.real
        array([[ 1.,  0.],
               [ 0., -1.]])
    """
    config.validate()
    seed = config.seed if seed is None else seed
    if seed is None:
        seed = 0
    n = config.qubits
    rng = np.random.default_rng(seed)
    half = config.coupling_scale / 2.0
    couplings = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            couplings[i, j] = rng.uniform(-half, half)
    couplings.setflags(write=False)

    hamiltonian = ising_hamiltonian(couplings, config.field, n)
    step_unitary = unitary_from_hamiltonian(hamiltonian, config.tau / config.virtual_nodes)
    step_unitary.setflags(write=False)
    observables = tuple(
        HermitianOperator(embed_single_qubit(PAULI_Z, i, n)) for i in range(n)
    )
    logger.info(
        f"Built quantum reservoir: N={n}, tau={config.tau}, V={config.virtual_nodes}, seed={seed}"
    )
    return QrcReservoir(
        config=config,
        hamiltonian=hamiltonian,
        couplings=couplings,
        step_unitary=step_unitary,
        observables=observables,
    )


def encode_input(u: float) -> DensityMatrix:
    """
    Single-qubit state encoding one input sample.

    Returns:
        ``[[1-u, sqrt(u(1-u))], [sqrt(u(1-u)), u]]``.

    Raises:
        DimensionError: If u lies outside [0, 1].
    """
    if not 0.0 <= u <= 1.0:
        raise DimensionError(f"input {u} outside [0, 1]; normalize the series first")
    off = np.sqrt(u * (1.0 - u))
    return DensityMatrix(np.array([[1.0 - u, off], [off, u]], dtype=complex))


def inject(rho: DensityMatrix, u: float) -> DensityMatrix:
    """Replace the first qubit: rho -> encode_input(u) (x) Tr_1(rho)."""
    if rho.dim < 2:
        raise DimensionError("cannot inject into a zero-qubit state")
    return DensityMatrix(kron(encode_input(u).matrix, partial_trace_first_qubit(rho.matrix)))


def qrc_step(
    reservoir: QrcReservoir, rho: DensityMatrix, u: float
) -> tuple[DensityMatrix, np.ndarray]:
    """
    Inject one sample and evolve for tau in V slices.

    Returns:
        The new state and N*V signals ordered
        [v=1: Z_1..Z_N, v=2: Z_1..Z_N, ...].
    """
    if rho.dim != reservoir.dim:
        raise DimensionError(f"state dimension {rho.dim} differs from reservoir {reservoir.dim}")
    matrix = inject(rho, u).matrix
    unitary = reservoir.step_unitary
    unitary_dag = unitary.conj().T
    n, v_count = reservoir.num_qubits, reservoir.config.virtual_nodes
    signals = np.empty(n * v_count)
    for v in range(v_count):
        matrix = unitary @ matrix @ unitary_dag
        for i, observable in enumerate(reservoir.observables):
            signals[v * n + i] = trace_inner(matrix, observable)
    return DensityMatrix(matrix), signals


def qrc_drive(
    reservoir: QrcReservoir,
    series: TimeSeries,
    initial_state: Optional[DensityMatrix] = None,
    washout: int = 0,
    check_interval: int = QRC_PSD_CHECK_INTERVAL,
) -> StateTrajectory:
    """
    Drive the quantum reservoir over a one-channel series in [0, 1].

    Starts from I / 2^N unless an initial state is given. Trace and
    Hermiticity are checked every step, positivity every check_interval
    steps.

    Raises:
        DimensionError: For multichannel input or samples outside [0, 1].
        NumericalError: If the state leaves the set of density matrices.
    """
    if series.channels != 1:
        raise DimensionError("the quantum reservoir accepts one-channel input only")
    check_input(reservoir, series)
    rho = reservoir.initial_state() if initial_state is None else initial_state
    rows = np.empty((series.length, reservoir.descriptor.readout_dimension))
    for k in range(series.length):
        rho, rows[k] = qrc_step(reservoir, rho, float(series.data[k, 0]))
        psd_tol = Tolerance.STATE_PSD if (k + 1) % check_interval == 0 else None
        try:
            rho.validate(psd_tol=psd_tol)
        except NumericalError as e:
            raise NumericalError(f"step {k}: {e}") from e
        if psd_tol is not None:
            logger.debug(f"Step {k + 1}: trace error {abs(rho.trace() - 1):.2e}, positivity checked")
    return StateTrajectory(rows, washout=washout)
