"""
Unit tests for tasks_service module.

Tests the benchmark generators (NARMA-10, delay memory, sine prediction,
Mackey-Glass), memory capacity and task normalization.
"""

import numpy as np
import pytest
from unittest.mock import patch

from src.errors import ConfigError, DimensionError
from src.models import TaskKind, TaskSpec
from src.services import tasks_service
from src.services.tasks_service import (
    delay_memory,
    delayed,
    generate,
    mackey_glass,
    mackey_glass_series,
    memory_capacity,
    narma10,
    narma10_target,
    sine_prediction,
)


def reference_narma10(u: np.ndarray) -> np.ndarray:
    """NARMA-10 with explicit zero-padded history."""
    padded_u = np.concatenate([np.zeros(10), u])
    y = np.zeros(len(u) + 10)
    for t in range(10, len(u) + 9):
        y[t + 1] = (
            0.3 * y[t]
            + 0.05 * y[t] * sum(y[t - i] for i in range(10))
            + 1.5 * padded_u[t - 9] * padded_u[t]
            + 0.1
        )
    return y[10:]


class TestNarma10:
    """Tests for NARMA-10 generation."""

    def test_zero_input_values(self):
        """Test the first values for an all-zero input."""
        np.testing.assert_allclose(narma10_target(np.zeros(3)), [0.0, 0.1, 0.1305])

    def test_matches_reference(self):
        """Test the recursion against an explicitly padded implementation."""
        u = np.random.default_rng(0).uniform(0, 0.5, size=60)
        np.testing.assert_allclose(narma10_target(u), reference_narma10(u), atol=1e-14)

    def test_input_range_and_length(self):
        """Test equal lengths, input range and a bounded target."""
        u, y = narma10(500, seed=1)
        assert u.length == y.length == 500
        assert u.data.min() >= 0.0 and u.data.max() <= 0.5
        assert np.all(np.abs(y.data) <= 10.0)

    def test_too_short(self):
        """Test that length <= 10 is rejected."""
        with pytest.raises(ConfigError):
            narma10(10, seed=0)

    def test_divergent_realization_regenerated(self):
        """Test that a divergent realization is replaced by the next seed."""
        calls = []

        def fake_target(u):
            calls.append(len(u))
            y = np.full(len(u), 0.2)
            if len(calls) == 1:
                y[-1] = 1e6
            return y

        with patch.object(tasks_service, "narma10_target", side_effect=fake_target):
            data = generate(TaskSpec(kind=TaskKind.NARMA10, length=50, seed=5))
        assert data.regenerations == 1
        assert data.seed_used == 6


class TestDelayMemory:
    """Tests for delay-memory generation."""

    def test_shifted_target(self):
        """Test that the target is the input shifted by the delay."""
        u, y = delay_memory(20, 3, seed=0)
        np.testing.assert_array_equal(y.data[:3, 0], np.zeros(3))
        np.testing.assert_array_equal(y.data[3:, 0], u.data[:-3, 0])

    def test_zero_delay_is_identity(self):
        """Test that delay 0 reproduces the input."""
        u, y = delay_memory(10, 0, seed=0)
        np.testing.assert_array_equal(u.data, y.data)

    def test_delay_not_shorter_than_length(self):
        """Test that delay >= length is rejected."""
        with pytest.raises(ConfigError):
            delay_memory(5, 5, seed=0)

    def test_delayed_helper(self):
        """Test the shift helper with zero padding."""
        np.testing.assert_array_equal(delayed(np.array([1.0, 2.0, 3.0]), 1), [0.0, 1.0, 2.0])
        np.testing.assert_array_equal(delayed(np.array([1.0, 2.0]), 5), [0.0, 0.0])


class TestMemoryCapacity:
    """Tests for memory_capacity function."""

    def test_sum(self):
        """Test that capacity sums the profile."""
        assert memory_capacity(np.array([1.0, 0.5, 0.25])) == pytest.approx(1.75)

    def test_zero_profile(self):
        """Test the empty-memory case."""
        assert memory_capacity(np.zeros(10)) == 0.0

    def test_out_of_range_entry(self):
        """Test that entries outside [0, 1] are rejected."""
        with pytest.raises(DimensionError):
            memory_capacity(np.array([0.5, 1.5]))


class TestSinePrediction:
    """Tests for sine-prediction generation."""

    def test_values(self):
        """Test the input and the horizon-shifted target."""
        u, y = sine_prediction(100, horizon=2, period=50)
        t = np.arange(100)
        np.testing.assert_allclose(u.data[:, 0], np.sin(2 * np.pi * t / 50))
        np.testing.assert_allclose(y.data[:, 0], np.sin(2 * np.pi * (t + 2) / 50))

    def test_zero_horizon(self):
        """Test that horizon 0 makes target equal input."""
        u, y = sine_prediction(30, horizon=0, period=10)
        np.testing.assert_array_equal(u.data, y.data)

    def test_invalid_period(self):
        """Test that a non-positive period is rejected."""
        with pytest.raises(ConfigError):
            sine_prediction(30, horizon=1, period=0)


class TestMackeyGlass:
    """Tests for Mackey-Glass generation."""

    def test_deterministic_and_bounded(self):
        """Test repeatability and the attractor's range."""
        a = mackey_glass_series(500)
        b = mackey_glass_series(500)
        np.testing.assert_array_equal(a, b)
        assert np.all((a > 0.0) & (a < 2.0))

    def test_step_halving(self):
        """Test that halving the integration step changes the first 20 samples by < 1e-4."""
        coarse = mackey_glass_series(20, dt=1.0, transient=0)
        fine = mackey_glass_series(20, dt=0.5, transient=0)
        assert np.max(np.abs(coarse - fine)) < 1e-4

    def test_initial_history(self):
        """Test that the first sample without transient is the constant history."""
        assert mackey_glass_series(5, transient=0)[0] == 1.2

    def test_horizon_shift(self):
        """Test that the target is the series shifted by the horizon."""
        u, y = mackey_glass(200, horizon=3)
        np.testing.assert_array_equal(y.data[:-3], u.data[3:])

    def test_step_must_divide_one(self):
        """Test that an integration step not dividing 1 is rejected."""
        with pytest.raises(ConfigError):
            mackey_glass_series(10, dt=0.3)


class TestGenerate:
    """Tests for generate function."""

    def test_normalization_maps_onto_unit_interval(self):
        """Test that the recorded normalization sends the input onto [0, 1]."""
        data = generate(TaskSpec(kind=TaskKind.NARMA10, length=500, seed=3))
        normalized = data.input_normalization.apply(data.input).data
        assert normalized.min() == 0.0
        assert normalized.max() == 1.0

    def test_seed_argument_overrides_task_seed(self):
        """Test that an explicit seed wins over the task's own seed."""
        spec = TaskSpec(kind=TaskKind.DELAY_MEMORY, length=50, delay=2, seed=1)
        a = generate(spec)
        b = generate(spec, seed=2)
        c = generate(spec, seed=1)
        assert not np.array_equal(a.input.data, b.input.data)
        np.testing.assert_array_equal(a.input.data, c.input.data)

    def test_every_kind(self):
        """Test that every task kind yields equal-length input and target."""
        for kind in TaskKind:
            data = generate(TaskSpec(kind=kind, length=120, delay=2, seed=0))
            assert data.input.length == data.target.length == 120
