"""
Dense quantum linear algebra for small qubit registers.

Complex matrices are plain numpy arrays of dtype complex128. Hermitian
operators carry their own validation. Qubit 1 is the most significant bit
of the computational-basis index, so for an N-qubit operator
``kron(A_1, kron(A_2, ... A_N))`` places ``A_1`` on the first qubit.
"""

from dataclasses import dataclass
from functools import reduce

import numpy as np
import scipy.linalg

from src.config import Tolerance
from src.errors import DimensionError, NumericalError

ComplexMatrix = np.ndarray

IDENTITY_2: np.ndarray = np.eye(2, dtype=complex)
PAULI_X: np.ndarray = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y: np.ndarray = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z: np.ndarray = np.array([[1, 0], [0, -1]], dtype=complex)

for _pauli in (IDENTITY_2, PAULI_X, PAULI_Y, PAULI_Z):
    _pauli.setflags(write=False)


def as_complex_matrix(a: np.ndarray) -> ComplexMatrix:
    """
    Coerce to a square, finite complex matrix.

    Raises:
        DimensionError: If the array is not square.
        NumericalError: If it holds NaN or infinite entries.
    """
    m = np.asarray(a, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {m.shape}")
    if not np.isfinite(m).all():
        raise NumericalError("matrix holds non-finite entries")
    return m


def hermiticity_error(a: ComplexMatrix) -> float:
    """Largest entrywise deviation |A - A^dagger|."""
    return float(np.max(np.abs(a - a.conj().T))) if a.size else 0.0


@dataclass(frozen=True)
class HermitianOperator:
    """
    A Hermitian matrix, checked on construction.

    Attributes:
        matrix: Square complex array with |M - M^dagger| <= tolerance.
    """

    matrix: ComplexMatrix

    def __post_init__(self) -> None:
        m = as_complex_matrix(self.matrix)
        deviation = hermiticity_error(m)
        if deviation > Tolerance.HERMITIAN:
            raise NumericalError(f"operator is not Hermitian (deviation {deviation:.3e})")
        m = m.copy()
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


def _hermitian_matrix(a: HermitianOperator | np.ndarray) -> ComplexMatrix:
    if isinstance(a, HermitianOperator):
        return a.matrix
    return HermitianOperator(a).matrix


def hermitian_eigendecomposition(a: HermitianOperator | np.ndarray) -> tuple[np.ndarray, ComplexMatrix]:
    """
    Diagonalize a Hermitian operator.

    Args:
        a: Hermitian operator (raw arrays are validated first).

    Returns:
        Ascending real eigenvalues and the unitary whose columns are the
        matching eigenvectors, so that ``A = U diag(w) U^dagger``.

    Raises:
        NumericalError: If the input is not Hermitian.

    Example:
        >>> w, u = hermitian_eigendecomposition(PAULI_Z)
        >>> w
        array([-1.,  1.])
    """
    matrix = _hermitian_matrix(a)
    eigenvalues, eigenvectors = scipy.linalg.eigh(matrix)
    return eigenvalues, eigenvectors


def unitary_from_hamiltonian(h: HermitianOperator | np.ndarray, tau: float) -> ComplexMatrix:
    """
    Propagator exp(-i H tau) through the spectral decomposition of H.

    Args:
        h: Hamiltonian.
        tau: Evolution time.

    Returns:
        The unitary ``U diag(exp(-i w tau)) U^dagger``.
    """
    eigenvalues, eigenvectors = hermitian_eigendecomposition(h)
    phases = np.exp(-1j * eigenvalues * tau)
    return (eigenvectors * phases) @ eigenvectors.conj().T


def kron(a: ComplexMatrix, b: ComplexMatrix) -> ComplexMatrix:
    """Kronecker (tensor) product; ``a`` acts on the more significant qubits."""
    return np.kron(a, b)


def kron_all(factors: list[np.ndarray]) -> ComplexMatrix:
    """Kronecker product of a list of factors, first factor most significant."""
    return reduce(np.kron, factors)


def embed_single_qubit(op: np.ndarray, site: int, num_qubits: int) -> ComplexMatrix:
    """
    Lift a 2x2 operator onto qubit ``site`` (0-based, 0 = first qubit) of a register.

    Example:
        >>> embed_single_qubit(PAULI_Z, 0, 2).diagonal().real
        array([ 1.,  1., -1., -1.])
    """
    if not 0 <= site < num_qubits:
        raise DimensionError(f"site {site} outside register of {num_qubits} qubits")
    factors = [IDENTITY_2] * num_qubits
    factors[site] = op
    return kron_all(factors)


def is_power_of_two(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


def partial_trace_first_qubit(rho: ComplexMatrix) -> ComplexMatrix:
    """
    Trace out the first (most significant) qubit.

    Entry (i, j) of the result is ``rho[i, j] + rho[i + D/2, j + D/2]``.

    Args:
        rho: Matrix of dimension 2^N with N >= 1.

    Returns:
        The reduced matrix of dimension 2^(N-1).

    Raises:
        DimensionError: If the dimension is not a power of two >= 2.
    """
    m = np.asarray(rho)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {m.shape}")
    dim = m.shape[0]
    if dim < 2 or not is_power_of_two(dim):
        raise DimensionError(f"dimension {dim} is not a power of two >= 2")
    half = dim // 2
    blocks = m.reshape(2, half, 2, half)
    return np.einsum("ajak->jk", blocks)


def trace_inner(rho: ComplexMatrix, a: HermitianOperator | np.ndarray) -> float:
    """
    Expectation value Re Tr(rho A).

    Raises:
        DimensionError: If the dimensions differ.
        NumericalError: If the imaginary part exceeds the tolerance, which
            only happens for non-Hermitian (corrupted) inputs.
    """
    a_matrix = a.matrix if isinstance(a, HermitianOperator) else np.asarray(a)
    if rho.shape != a_matrix.shape:
        raise DimensionError(f"shape mismatch {rho.shape} vs {a_matrix.shape}")
    value = np.einsum("ij,ji->", rho, a_matrix)
    if abs(value.imag) > Tolerance.IMAGINARY_RESIDUE:
        raise NumericalError(f"Tr(rho A) has imaginary part {value.imag:.3e}")
    return float(value.real)
