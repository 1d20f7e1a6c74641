"""
Unit tests for esn_service module.

Tests network generation (spectral scaling, sparsity, determinism,
redraws), the leaky-integrator update and the spectral radius helpers.
"""

import numpy as np
import pytest
from unittest.mock import patch

from src.errors import ConfigError, DimensionError, GenerationError
from src.models import EsnConfig, Nonlinearity, ReservoirKind, TimeSeries
from src.services.esn_service import (
    EsnReservoir,
    generate,
    observed_state,
    sparse_spectral_radius,
    spectral_radius,
    step,
)
from src.services.reservoir_service import Reservoir, drive


class TestGenerate:
    """Tests for generate function."""

    def test_spectral_radius_scaled(self):
        """Test that W is rescaled to the configured spectral radius."""
        esn = generate(EsnConfig(nodes=100, spectral_radius=0.9, seed=1))
        assert spectral_radius(esn.W) == pytest.approx(0.9, abs=1e-10)

    def test_same_seed_same_network(self):
        """Test that generation is deterministic in the seed."""
        config = EsnConfig(nodes=30, seed=5)
        a, b = generate(config), generate(config)
        np.testing.assert_array_equal(a.W, b.W)
        np.testing.assert_array_equal(a.W_in, b.W_in)
        np.testing.assert_array_equal(a.b, b.b)

    def test_seed_argument_overrides_config(self):
        """Test that different seeds give different networks."""
        config = EsnConfig(nodes=30, seed=5)
        assert not np.array_equal(generate(config).W, generate(config, seed=6).W)

    def test_connectivity(self):
        """Test that a sparse draw keeps roughly the requested fraction of weights."""
        esn = generate(EsnConfig(nodes=100, connectivity=0.1, seed=2))
        fraction = np.count_nonzero(esn.W) / esn.W.size
        assert 0.05 < fraction < 0.15

    def test_input_weight_range(self):
        """Test that input weights lie within the input scaling."""
        esn = generate(EsnConfig(nodes=50, input_dim=2, input_scaling=0.3, seed=3))
        assert esn.W_in.shape == (50, 2)
        assert np.all(np.abs(esn.W_in) <= 0.3)

    def test_zero_radius_draw_is_redrawn(self):
        """Test that a draw with zero spectral radius is replaced by the next draw."""
        with patch("src.services.esn_service.spectral_radius", side_effect=[0.0, 2.0]):
            esn = generate(EsnConfig(nodes=10, spectral_radius=0.5, seed=0))
        assert esn.nodes == 10

    def test_redraws_exhausted(self):
        """Test that persistent zero spectral radius raises GenerationError."""
        with patch("src.services.esn_service.spectral_radius", return_value=0.0):
            with pytest.raises(GenerationError):
                generate(EsnConfig(nodes=10, seed=0))

    def test_invalid_config(self):
        """Test that an invalid config is rejected before drawing."""
        with pytest.raises(ConfigError):
            generate(EsnConfig(nodes=0))

    def test_satisfies_reservoir_contract(self):
        """Test that the generated network implements the Reservoir protocol."""
        esn = generate(EsnConfig(nodes=10, seed=0))
        assert isinstance(esn, Reservoir)
        assert esn.descriptor.kind is ReservoirKind.CLASSICAL_ESN
        assert esn.descriptor.readout_dimension == 10

    def test_weights_are_read_only(self):
        """Test that the generated matrices cannot be mutated."""
        esn = generate(EsnConfig(nodes=10, seed=0))
        with pytest.raises(ValueError):
            esn.W[0, 0] = 1.0


class TestStep:
    """Tests for step function."""

    def test_hand_evaluation(self):
        """Test one update against a hand computation."""
        esn = EsnReservoir(W=[[0.5]], W_in=[[1.0]], b=[0.0])
        x = step(esn, np.array([0.2]), np.array([0.3]))
        assert x[0] == pytest.approx(np.tanh(0.4))

    def test_leaky_update(self):
        """Test the leaky-integrator blend."""
        esn = EsnReservoir(W=[[0.5]], W_in=[[1.0]], b=[0.1], leak_rate=0.5)
        x = step(esn, np.array([0.2]), np.array([0.3]))
        assert x[0] == pytest.approx(0.5 * 0.2 + 0.5 * np.tanh(0.5))

    def test_identity_nonlinearity(self):
        """Test the linear reservoir variant."""
        esn = EsnReservoir(W=[[2.0]], W_in=[[1.0]], b=[0.0], nonlinearity=Nonlinearity.IDENTITY)
        assert step(esn, np.array([1.0]), np.array([1.0]))[0] == pytest.approx(3.0)

    def test_wrong_state_length(self):
        """Test that a state of the wrong length is rejected."""
        esn = EsnReservoir(W=np.zeros((3, 3)), W_in=np.ones((3, 1)), b=np.zeros(3))
        with pytest.raises(DimensionError):
            step(esn, np.zeros(2), np.array([1.0]))

    def test_wrong_input_length(self):
        """Test that an input of the wrong length is rejected."""
        esn = EsnReservoir(W=np.zeros((3, 3)), W_in=np.ones((3, 1)), b=np.zeros(3))
        with pytest.raises(DimensionError):
            step(esn, np.zeros(3), np.array([1.0, 2.0]))

    def test_inconsistent_shapes(self):
        """Test that mismatching weight shapes are rejected at construction."""
        with pytest.raises(DimensionError):
            EsnReservoir(W=np.zeros((3, 3)), W_in=np.ones((2, 1)), b=np.zeros(3))

    def test_observed_state_is_full_state(self):
        """Test that every ESN state variable is observed."""
        x = np.array([0.1, -0.2])
        np.testing.assert_array_equal(observed_state(x), x)

    def test_tanh_states_stay_in_open_interval(self):
        """Test that tanh states with full leak stay inside (-1, 1)."""
        esn = generate(EsnConfig(nodes=30, spectral_radius=1.2, input_scaling=2.0, seed=1))
        series = TimeSeries(np.random.default_rng(1).uniform(-1.0, 1.0, size=400))
        states = drive(esn, series).states
        assert np.all(np.abs(states) < 1.0)


class TestSpectralRadius:
    """Tests for spectral radius helpers."""

    def test_sparse_radius_real_dominant(self):
        """Test the Arnoldi estimate on a matrix with a real dominant eigenvalue."""
        rng = np.random.default_rng(0)
        q, _ = np.linalg.qr(rng.standard_normal((6, 6)))
        matrix = q @ np.diag([3.0, 1.0, -2.0, 0.5, 0.1, -0.3]) @ q.T
        assert sparse_spectral_radius(matrix) == pytest.approx(3.0, rel=1e-10)

    def test_sparse_radius_complex_pair(self):
        """Test the Arnoldi estimate when the dominant eigenvalues are a complex pair."""
        rng = np.random.default_rng(1)
        q, _ = np.linalg.qr(rng.standard_normal((8, 8)))
        block = np.diag([0.9, -0.5, 0.3, 0.2, -0.1, 0.05])
        core = np.zeros((8, 8))
        core[:2, :2] = 2.0 * np.array([[np.cos(0.4), -np.sin(0.4)], [np.sin(0.4), np.cos(0.4)]])
        core[2:, 2:] = block
        assert sparse_spectral_radius(q @ core @ q.T) == pytest.approx(2.0, rel=1e-10)

    def test_zero_matrix(self):
        """Test that the zero matrix has spectral radius 0."""
        assert spectral_radius(np.zeros((4, 4))) == 0.0
        assert sparse_spectral_radius(np.zeros((4, 4))) == 0.0

    def test_rotation(self):
        """Test a matrix whose eigenvalues are a complex pair."""
        rotation = 0.7 * np.array([[0.0, -1.0], [1.0, 0.0]])
        assert spectral_radius(rotation) == pytest.approx(0.7)
