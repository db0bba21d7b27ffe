"""
Unit tests for fuzz module.
"""

import math
from unittest.mock import patch

import numpy as np
import pytest

from ddlab.fuzz import (
    FIELD_ORACLES,
    FuzzSummary,
    combine_summaries,
    fuzz_fields,
    fuzz_pointwise,
    random_exponent,
    random_field,
)
from ddlab.grid import Grid
from ddlab.lebesgue import modular_norm_bracket_check


class TestFuzzSummary:
    """Tests for FuzzSummary bookkeeping."""

    def test_record(self):
        """Test samples, violations and worst margin accumulate."""
        summary = FuzzSummary("x")
        summary.record(np.array([0.5, -0.1]), np.array([True, False]))
        summary.record(np.array([0.2]), np.array([True]))

        assert summary.samples == 3
        assert summary.violations == 1
        assert summary.worst_margin == pytest.approx(-0.1)

    def test_empty_to_dict(self):
        """Test an empty sweep reports no margin."""
        assert FuzzSummary("x").to_dict() == {
            "name": "x",
            "samples": 0,
            "violations": 0,
            "worst_margin": None,
        }

    def test_combine(self):
        """Test totals and the overall worst margin."""
        a = FuzzSummary("a", 10, 0, 0.3)
        b = FuzzSummary("b", 5, 2, -0.01)
        total = combine_summaries("all", [a, b, FuzzSummary("empty")])

        assert total.samples == 15
        assert total.violations == 2
        assert total.worst_margin == -0.01


class TestPointwiseSweep:
    """Tests for the pointwise monotonicity sweep."""

    def test_no_violations(self):
        """Test a moderate sweep finds no counterexample."""
        summary = fuzz_pointwise(20_000, seed=0)
        assert summary.samples == 20_000
        assert summary.violations == 0
        assert summary.worst_margin >= 0.0

    def test_deterministic_in_seed(self):
        """Test the same seed gives the same summary."""
        assert fuzz_pointwise(5_000, seed=42) == fuzz_pointwise(5_000, seed=42)

    def test_independent_of_workers(self):
        """Test worker count does not change the result."""
        samples = 250_000  # three chunks
        assert fuzz_pointwise(samples, 3, workers=1) == fuzz_pointwise(samples, 3, workers=3)

    def test_zero_samples(self):
        """Test an empty sweep."""
        summary = fuzz_pointwise(0, seed=1)
        assert summary.samples == 0
        assert math.isinf(summary.worst_margin)

    def test_negative_samples(self):
        """Test negative sample counts are rejected."""
        with pytest.raises(ValueError):
            fuzz_pointwise(-1, seed=0)


class TestFieldSweep:
    """Tests for the grid-level oracle sweeps."""

    def test_random_exponent_range(self):
        """Test random exponents respect the requested range."""
        rng = np.random.default_rng(0)
        grid = Grid(0.0, 1.0, 33)
        for _ in range(20):
            p = random_exponent(rng, grid, 1.2, 1.8)
            assert 1.2 <= p.p_minus <= p.p_plus <= 1.8

    def test_random_field_shape(self):
        """Test random fields live on the grid nodes."""
        grid = Grid(-1.0, 1.0, 17)
        assert len(random_field(np.random.default_rng(1), grid)) == 17

    def test_all_oracles_pass(self):
        """Test every oracle survives a short sweep."""
        summaries = fuzz_fields(40, seed=7)

        assert [s.name for s in summaries] == list(FIELD_ORACLES)
        for summary in summaries:
            assert summary.samples == 40
            assert summary.violations == 0, summary

    def test_bracket_oracle_calls_library_check(self):
        """Test the bracket sweep runs the public check once per trial."""
        with patch("ddlab.fuzz.modular_norm_bracket_check", wraps=modular_norm_bracket_check) as check:
            summaries = fuzz_fields(5, seed=3)

        assert check.call_count == 5
        bracket = next(s for s in summaries if s.name == "modular_norm_bracket_check")
        assert bracket.samples == 5 and bracket.violations == 0

    def test_deterministic_across_workers(self):
        """Test the field sweep does not depend on worker count."""
        assert fuzz_fields(10, seed=2, workers=1) == fuzz_fields(10, seed=2, workers=3)

    def test_negative_trials(self):
        """Test negative trial counts are rejected."""
        with pytest.raises(ValueError):
            fuzz_fields(-5, seed=0)
