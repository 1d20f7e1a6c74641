"""
Unit tests for diagnostics_service module.
"""

import numpy as np
import pytest

from src.errors import DimensionError
from src.models import DiagnosticsSettings, EsnConfig, Nonlinearity, QrcConfig, TimeSeries
from src.services import qrc_service
from src.services.diagnostics_service import (
    echo_state_test,
    fading_memory_profile,
    kernel_rank,
    quiescence_test,
    reproducibility_test,
    run_diagnostics,
    separation_test,
)
from src.services.esn_service import EsnReservoir, generate


def uniform_series(length: int, seed: int) -> TimeSeries:
    return TimeSeries(np.random.default_rng(seed).uniform(size=length))


def memoryless_esn(nodes: int = 20, seed: int = 0) -> EsnReservoir:
    rng = np.random.default_rng(seed)
    return EsnReservoir(
        W=np.zeros((nodes, nodes)),
        W_in=rng.uniform(-1, 1, size=(nodes, 1)),
        b=rng.uniform(-0.1, 0.1, size=nodes),
    )


class TestEchoStateTest:
    """Tests for echo_state_test function."""

    def test_contracting_esn_converges(self):
        """Test convergence for spectral radius 0.9 over 20 seeds."""
        for seed in range(20):
            esn = generate(EsnConfig(nodes=100, spectral_radius=0.9, seed=seed))
            result = echo_state_test(esn, uniform_series(500, seed), trials=2, epsilon=1e-6, seed=seed)
            assert result.step is not None

    def test_no_recurrence_converges_immediately(self):
        """Test that W = 0 forgets the initial state after one step."""
        result = echo_state_test(memoryless_esn(), uniform_series(10, 0), trials=3)
        assert result.step == 1
        assert result.final_distance == 0.0

    def test_expanding_linear_reservoir_never_converges(self):
        """Test that a linear reservoir with radius 2 reports no convergence."""
        esn = EsnReservoir(
            W=2.0 * np.eye(5),
            W_in=np.ones((5, 1)),
            b=np.zeros(5),
            nonlinearity=Nonlinearity.IDENTITY,
        )
        result = echo_state_test(esn, uniform_series(200, 1), trials=2)
        assert result.step is None
        assert result.distances.shape == (200,)

    def test_needs_two_trials(self):
        """Test that a single trial is rejected."""
        with pytest.raises(DimensionError):
            echo_state_test(memoryless_esn(), uniform_series(10, 0), trials=1)

    def test_final_distance_within_convergence_distance(self):
        """Test that the final distance does not exceed the distance at the convergence step."""
        esn = generate(EsnConfig(nodes=50, spectral_radius=0.9, seed=7))
        result = echo_state_test(esn, uniform_series(500, 7), trials=3, epsilon=1e-6, seed=7)
        assert result.step is not None
        assert result.final_distance <= result.distances[result.step - 1]

    def test_quantum_reservoir_converges(self):
        """Test that a small quantum reservoir forgets its initial state."""
        reservoir = qrc_service.build(QrcConfig(qubits=3, virtual_nodes=2, seed=0))
        result = echo_state_test(reservoir, uniform_series(300, 2), trials=2, epsilon=1e-6)
        assert result.step is not None


class TestSeparationTest:
    """Tests for separation_test function."""

    def test_identical_inputs(self):
        """Test that identical inputs score 0."""
        esn = generate(EsnConfig(nodes=30, seed=0))
        series = uniform_series(100, 0)
        assert separation_test(esn, series, series) == 0.0

    def test_different_inputs_positive_and_symmetric(self):
        """Test that different inputs separate and the score is symmetric."""
        esn = generate(EsnConfig(nodes=30, seed=0))
        a, b = uniform_series(100, 1), uniform_series(100, 2)
        forward = separation_test(esn, a, b, washout=10)
        assert forward > 0.0
        assert separation_test(esn, b, a, washout=10) == forward

    def test_length_mismatch(self):
        """Test that inputs of different lengths are rejected."""
        esn = generate(EsnConfig(nodes=5, seed=0))
        with pytest.raises(DimensionError):
            separation_test(esn, uniform_series(10, 0), uniform_series(11, 0))


class TestReproducibilityTest:
    """Tests for reproducibility_test function."""

    def test_zero_noise(self):
        """Test that zero noise scores 0."""
        esn = generate(EsnConfig(nodes=20, seed=0))
        assert reproducibility_test(esn, uniform_series(50, 0), noise=0.0) == 0.0

    def test_input_blind_reservoir(self):
        """Test that a reservoir ignoring its input is perfectly reproducible."""
        esn = EsnReservoir(W=0.5 * np.eye(4), W_in=np.zeros((4, 1)), b=np.full(4, 0.1))
        assert reproducibility_test(esn, uniform_series(50, 0), noise=1e-3) == 0.0

    def test_linear_response_regime(self):
        """Test that the score changes by at most a factor 2 across small noise levels."""
        esn = generate(EsnConfig(nodes=50, seed=3))
        series = uniform_series(200, 3)
        small = reproducibility_test(esn, series, noise=1e-4, seed=1)
        large = reproducibility_test(esn, series, noise=1e-3, seed=1)
        assert 0.5 <= small / large <= 2.0

    def test_negative_noise(self):
        """Test that a negative noise amplitude is rejected."""
        esn = generate(EsnConfig(nodes=5, seed=0))
        with pytest.raises(DimensionError):
            reproducibility_test(esn, uniform_series(10, 0), noise=-1.0)

    def test_needs_one_trial(self):
        """Test that zero noise trials are rejected."""
        esn = generate(EsnConfig(nodes=5, seed=0))
        with pytest.raises(DimensionError):
            reproducibility_test(esn, uniform_series(10, 0), noise=1e-3, trials=0)


class TestFadingMemoryProfile:
    """Tests for fading_memory_profile function."""

    def test_memory_fades(self):
        """Test that recent inputs are recalled better than distant ones."""
        esn = generate(EsnConfig(nodes=50, seed=0))
        profile = fading_memory_profile(esn, max_delay=40, length=2000, seed=0)
        assert profile.shape == (40,)
        assert profile[0] > profile[39]
        assert np.all((profile >= 0.0) & (profile <= 1.0))

    def test_memoryless_reservoir(self):
        """Test that a reservoir without recurrence recalls nothing."""
        profile = fading_memory_profile(memoryless_esn(), max_delay=5, length=2000, seed=1)
        assert np.all(profile < 0.1)

    @pytest.mark.parametrize("nodes", [20, 50])
    def test_capacity_bounded_by_size(self, nodes):
        """Test that the summed profile stays below the node count over 10 seeds."""
        for seed in range(10):
            esn = generate(EsnConfig(nodes=nodes, seed=seed))
            profile = fading_memory_profile(esn, max_delay=2 * nodes, length=2000, seed=seed)
            assert profile.sum() <= nodes + 0.5

    def test_invalid_max_delay(self):
        """Test that max_delay < 1 is rejected."""
        with pytest.raises(DimensionError):
            fading_memory_profile(memoryless_esn(), max_delay=0)


class TestQuiescenceTest:
    """Tests for quiescence_test function."""

    def test_no_recurrence_settles_at_second_step(self):
        """Test that W = 0 reaches its fixed point after one step."""
        result = quiescence_test(memoryless_esn(), length=20, epsilon=1e-12)
        assert result.step == 2
        assert result.final_distance == 0.0

    def test_contracting_esn_settles(self):
        """Test that a contracting ESN eventually stops moving."""
        esn = generate(EsnConfig(nodes=40, spectral_radius=0.5, seed=0))
        assert quiescence_test(esn, length=300).step is not None

    def test_empty_length(self):
        """Test that a zero-length run is rejected."""
        with pytest.raises(DimensionError):
            quiescence_test(memoryless_esn(), length=0)


class TestKernelRank:
    """Tests for kernel_rank function."""

    def test_generic_esn_full_rank(self):
        """Test that a generic ESN spreads distinct streams over all nodes."""
        esn = generate(EsnConfig(nodes=20, seed=0))
        assert kernel_rank(esn, streams=50, length=100) == 20

    def test_input_blind_reservoir_rank_one(self):
        """Test that identical final states give rank 1."""
        esn = EsnReservoir(W=np.zeros((6, 6)), W_in=np.zeros((6, 1)), b=np.linspace(0.1, 0.6, 6))
        assert kernel_rank(esn, streams=10, length=5) == 1


class TestRunDiagnostics:
    """Tests for run_diagnostics function."""

    SETTINGS = DiagnosticsSettings(
        esp_length=200, max_delay=10, memory_length=600, kernel_streams=10, kernel_length=30
    )

    def test_report_contents(self):
        """Test the report's shape and its internal consistency."""
        esn = generate(EsnConfig(nodes=20, seed=0))
        report = run_diagnostics(esn, self.SETTINGS, seed=4)
        assert report.memory_profile.shape == (10,)
        assert report.memory_capacity == pytest.approx(report.memory_profile.sum())
        assert report.esp_convergence_step is not None
        assert 1 <= report.kernel_rank <= 10

    def test_reproducible(self):
        """Test that the same seed yields the same report."""
        esn = generate(EsnConfig(nodes=20, seed=0))
        a = run_diagnostics(esn, self.SETTINGS, seed=4)
        b = run_diagnostics(esn, self.SETTINGS, seed=4)
        np.testing.assert_array_equal(a.memory_profile, b.memory_profile)
        assert a.separation_score == b.separation_score
        assert a.reproducibility_score == b.reproducibility_score

    def test_quantum_reservoir(self):
        """Test that the suite runs on a quantum reservoir."""
        reservoir = qrc_service.build(QrcConfig(qubits=3, virtual_nodes=2, seed=0))
        report = run_diagnostics(reservoir, self.SETTINGS, seed=0)
        assert np.all((report.memory_profile >= 0.0) & (report.memory_profile <= 1.0))
