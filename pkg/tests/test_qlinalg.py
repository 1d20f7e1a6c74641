"""
Unit tests for qlinalg module.

Tests Hermitian validation, eigendecomposition, unitary propagators,
tensor products, the partial trace and expectation values.
"""

import numpy as np
import pytest
import scipy.linalg

from src.errors import DimensionError, NumericalError
from src.utils.qlinalg import (
    IDENTITY_2,
    PAULI_X,
    PAULI_Y,
    PAULI_Z,
    HermitianOperator,
    embed_single_qubit,
    hermitian_eigendecomposition,
    kron,
    kron_all,
    partial_trace_first_qubit,
    trace_inner,
    unitary_from_hamiltonian,
)


def random_hermitian(dim: int, rng: np.random.Generator) -> np.ndarray:
    a = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    return (a + a.conj().T) / 2


def random_density(dim: int, rng: np.random.Generator) -> np.ndarray:
    a = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    rho = a @ a.conj().T
    return rho / np.trace(rho)


class TestHermitianOperator:
    """Tests for HermitianOperator validation."""

    def test_accepts_pauli_matrices(self):
        """Test that Pauli matrices are accepted."""
        for pauli in (PAULI_X, PAULI_Y, PAULI_Z):
            assert HermitianOperator(pauli).dim == 2

    def test_rejects_non_hermitian(self):
        """Test that a non-Hermitian matrix is rejected."""
        with pytest.raises(NumericalError):
            HermitianOperator(np.array([[0, 1], [0, 0]], dtype=complex))

    def test_rejects_non_square(self):
        """Test that a non-square matrix is rejected."""
        with pytest.raises(DimensionError):
            HermitianOperator(np.zeros((2, 3)))

    def test_matrix_is_read_only(self):
        """Test that the stored matrix cannot be modified."""
        op = HermitianOperator(PAULI_Z)
        with pytest.raises(ValueError):
            op.matrix[0, 0] = 5


class TestEigendecomposition:
    """Tests for hermitian_eigendecomposition function."""

    def test_pauli_z_eigenvalues(self):
        """Test the spectrum of Pauli Z."""
        w, _ = hermitian_eigendecomposition(PAULI_Z)
        np.testing.assert_allclose(w, [-1.0, 1.0])

    def test_reconstruction(self):
        """Test that U diag(w) U^dagger reproduces the operator."""
        rng = np.random.default_rng(0)
        h = random_hermitian(8, rng)
        w, u = hermitian_eigendecomposition(h)
        np.testing.assert_allclose((u * w) @ u.conj().T, h, atol=1e-12)
        np.testing.assert_allclose(u.conj().T @ u, np.eye(8), atol=1e-12)


class TestUnitaryFromHamiltonian:
    """Tests for unitary_from_hamiltonian function."""

    def test_zero_time_is_identity(self):
        """Test that tau = 0 gives the identity."""
        rng = np.random.default_rng(1)
        u = unitary_from_hamiltonian(random_hermitian(4, rng), 0.0)
        np.testing.assert_allclose(u, np.eye(4), atol=1e-14)

    def test_unitarity(self):
        """Test U U^dagger = I."""
        rng = np.random.default_rng(2)
        u = unitary_from_hamiltonian(random_hermitian(16, rng), 1.7)
        np.testing.assert_allclose(u @ u.conj().T, np.eye(16), atol=1e-12)

    def test_pauli_z_closed_form(self):
        """Test exp(-i Z pi/2) = diag(-i, i)."""
        u = unitary_from_hamiltonian(PAULI_Z, np.pi / 2)
        np.testing.assert_allclose(u, np.diag([-1j, 1j]), atol=1e-15)

    def test_matches_matrix_exponential(self):
        """Test agreement with scipy's general matrix exponential."""
        rng = np.random.default_rng(3)
        h = random_hermitian(8, rng)
        np.testing.assert_allclose(
            unitary_from_hamiltonian(h, 0.3), scipy.linalg.expm(-1j * 0.3 * h), atol=1e-12
        )

    def test_pauli_x_closed_form(self):
        """Test exp(-i X pi/2) has a zero diagonal and -i off the diagonal."""
        u = unitary_from_hamiltonian(PAULI_X, np.pi / 2)
        np.testing.assert_allclose(u, np.array([[0.0, -1j], [-1j, 0.0]]), atol=1e-14)

    def test_group_property(self):
        """Test U(t1 + t2) = U(t1) U(t2)."""
        rng = np.random.default_rng(7)
        h = random_hermitian(8, rng)
        np.testing.assert_allclose(
            unitary_from_hamiltonian(h, 0.4 + 1.1),
            unitary_from_hamiltonian(h, 0.4) @ unitary_from_hamiltonian(h, 1.1),
            atol=1e-12,
        )


class TestKron:
    """Tests for kron, kron_all and embed_single_qubit."""

    def test_identity_product(self):
        """Test I (x) I = I_4."""
        np.testing.assert_array_equal(kron(IDENTITY_2, IDENTITY_2), np.eye(4))

    def test_shape(self):
        """Test the dimension of a three-factor product."""
        assert kron_all([PAULI_X, PAULI_Y, PAULI_Z]).shape == (8, 8)

    def test_first_qubit_is_most_significant(self):
        """Test that Z on the first qubit flips sign on the upper half of the basis."""
        np.testing.assert_array_equal(
            embed_single_qubit(PAULI_Z, 0, 2).diagonal().real, [1, 1, -1, -1]
        )
        np.testing.assert_array_equal(
            embed_single_qubit(PAULI_Z, 1, 2).diagonal().real, [1, -1, 1, -1]
        )

    def test_mixed_product(self):
        """Test (A (x) B)(C (x) D) = AC (x) BD."""
        rng = np.random.default_rng(8)
        a, c = random_hermitian(2, rng), random_hermitian(2, rng)
        b, d = random_hermitian(4, rng), random_hermitian(4, rng)
        np.testing.assert_allclose(kron(a, b) @ kron(c, d), kron(a @ c, b @ d), atol=1e-12)

    def test_trace_factorizes(self):
        """Test Tr(A (x) B) = Tr A Tr B."""
        rng = np.random.default_rng(9)
        a, b = random_hermitian(2, rng), random_hermitian(8, rng)
        assert np.trace(kron(a, b)) == pytest.approx(np.trace(a) * np.trace(b), abs=1e-12)

    def test_site_out_of_range(self):
        """Test that an invalid site is rejected."""
        with pytest.raises(DimensionError):
            embed_single_qubit(PAULI_Z, 2, 2)


class TestPartialTrace:
    """Tests for partial_trace_first_qubit function."""

    def test_product_state(self):
        """Test Tr_1(sigma (x) eta) = eta."""
        rng = np.random.default_rng(4)
        sigma = random_density(2, rng)
        eta = random_density(8, rng)
        np.testing.assert_allclose(partial_trace_first_qubit(kron(sigma, eta)), eta, atol=1e-15)

    def test_explicit_formula(self):
        """Test the entrywise definition rho[i, j] + rho[i + D/2, j + D/2]."""
        rng = np.random.default_rng(5)
        rho = random_density(8, rng)
        expected = rho[:4, :4] + rho[4:, 4:]
        np.testing.assert_allclose(partial_trace_first_qubit(rho), expected, atol=1e-15)

    def test_trace_preserved(self):
        """Test that the reduced matrix keeps the trace."""
        rng = np.random.default_rng(6)
        rho = random_density(16, rng)
        assert abs(np.trace(partial_trace_first_qubit(rho)) - 1.0) < 1e-12

    def test_linearity(self):
        """Test Tr_1(a X + b Y) = a Tr_1 X + b Tr_1 Y."""
        rng = np.random.default_rng(10)
        x, y = random_density(8, rng), random_density(8, rng)
        np.testing.assert_allclose(
            partial_trace_first_qubit(0.3 * x - 1.7 * y),
            0.3 * partial_trace_first_qubit(x) - 1.7 * partial_trace_first_qubit(y),
            atol=1e-14,
        )

    def test_invalid_dimensions(self):
        """Test that non-power-of-two and 1x1 matrices are rejected."""
        with pytest.raises(DimensionError):
            partial_trace_first_qubit(np.eye(3))
        with pytest.raises(DimensionError):
            partial_trace_first_qubit(np.eye(1))


class TestTraceInner:
    """Tests for trace_inner function."""

    def test_ground_state_expectation(self):
        """Test <0|Z|0> = 1 and <0|X|0> = 0."""
        rho = np.array([[1, 0], [0, 0]], dtype=complex)
        assert trace_inner(rho, PAULI_Z) == pytest.approx(1.0)
        assert trace_inner(rho, PAULI_X) == pytest.approx(0.0)

    def test_matches_trace_of_product(self):
        """Test agreement with np.trace(rho @ A)."""
        rng = np.random.default_rng(7)
        rho = random_density(4, rng)
        a = random_hermitian(4, rng)
        assert trace_inner(rho, a) == pytest.approx(np.trace(rho @ a).real, abs=1e-12)

    def test_imaginary_residue_rejected(self):
        """Test that a corrupted state yielding a complex expectation is rejected."""
        corrupted = np.array([[0, 1], [0, 0]], dtype=complex)
        with pytest.raises(NumericalError):
            trace_inner(corrupted, PAULI_Y)

    def test_shape_mismatch(self):
        """Test that mismatching dimensions are rejected."""
        with pytest.raises(DimensionError):
            trace_inner(np.eye(4) / 4, PAULI_Z)
