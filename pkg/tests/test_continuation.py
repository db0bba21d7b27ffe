"""
Unit tests for continuation module.
"""

from unittest.mock import patch

import numpy as np
import pytest

from ddlab.continuation import (
    PairReport,
    comparison_check,
    comparison_tolerance,
    geometric_schedule,
    run_continuation,
    validate_schedule,
)
from ddlab.errors import ConvergenceError
from ddlab.problem import SolverConfig
from ddlab.solver import solve_regularized
from tests.conftest import make_problem

SCHEDULE = [0.1, 0.05, 0.025]
FULL_SCHEDULE = [0.1, 0.05, 0.025, 0.0125]


class TestSchedule:
    """Tests for eps schedules."""

    def test_geometric(self):
        """Test eps_k = eps0 2^-k."""
        assert geometric_schedule(0.2, 3) == pytest.approx([0.2, 0.1, 0.05])
        assert geometric_schedule() == pytest.approx([0.1, 0.05, 0.025, 0.0125])

    def test_geometric_needs_levels(self):
        """Test at least one level."""
        with pytest.raises(ValueError):
            geometric_schedule(0.1, 0)

    @pytest.mark.parametrize("schedule", [[], [0.1, 0.1], [0.05, 0.1], [1.5, 0.1], [0.1, 0.0]])
    def test_invalid(self, schedule):
        """Test empty, non-decreasing or out-of-range schedules."""
        with pytest.raises(ValueError):
            validate_schedule(schedule)

    def test_valid(self):
        """Test a good schedule passes."""
        validate_schedule([1.0, 0.5, 1e-6])


class TestComparison:
    """Tests for pairwise comparison."""

    def test_ordering_holds(self):
        """Test u_eps decreases with eps."""
        cfg = SolverConfig(dt=1e-3)
        spec = make_problem(T=0.01)
        big = solve_regularized(spec.with_epsilon(0.1), cfg)
        small = solve_regularized(spec.with_epsilon(0.05), cfg)

        assert comparison_check(small, big) <= comparison_tolerance(spec.K)
        assert comparison_check(big, small) > 0.0

    def test_mismatched_times(self):
        """Test trajectories with other snapshot times are refused."""
        spec = make_problem(T=0.01)
        a = solve_regularized(spec, SolverConfig(dt=1e-3))
        b = solve_regularized(spec, SolverConfig(dt=2e-3))
        with pytest.raises(ValueError, match="times"):
            comparison_check(a, b)

    def test_mismatched_grids(self):
        """Test trajectories on other grids are refused."""
        cfg = SolverConfig(dt=1e-3)
        a = solve_regularized(make_problem(T=0.002), cfg)
        b = solve_regularized(make_problem(T=0.002, n=21), cfg)
        with pytest.raises(ValueError, match="grids"):
            comparison_check(a, b)

    def test_pair_report(self):
        """Test pass flag and serialization."""
        report = PairReport(0.05, 0.1, 1e-12, 1e-8)
        assert report.passed
        assert report.to_dict()["passed"] is True
        assert not PairReport(0.05, 0.1, 1e-3, 1e-8).passed


class TestRunContinuation:
    """Tests for the full sweep."""

    @pytest.fixture(scope="class")
    def result(self):
        spec = make_problem(m=2.0, T=0.01)
        return run_continuation(spec, SolverConfig(dt=1e-3), SCHEDULE)

    def test_all_levels_complete(self, result):
        """Test every level solved and pairs are consecutive."""
        assert [eps for eps, _ in result.completed] == SCHEDULE
        assert not result.failures
        assert [(p.epsilon_small, p.epsilon_big) for p in result.monotonicity_report] == [
            (0.05, 0.1),
            (0.025, 0.05),
        ]
        assert len(result.cauchy_gaps) == 2

    def test_comparison_passes(self, result):
        """Test the comparison principle across levels."""
        assert result.comparison_passed

    def test_cauchy_gaps_shrink(self, result):
        """Test neighbouring levels get closer as eps halves."""
        assert result.cauchy_gaps[1] < result.cauchy_gaps[0]

    def test_limit_estimate(self, result):
        """Test the limit is the smallest level and the squeeze holds."""
        _, u_small, _ = result.completed[-1][1].as_arrays()
        limit = np.array([f.values for f in result.limit_estimate])

        assert np.allclose(limit, u_small, rtol=0.0, atol=comparison_tolerance(result.K))
        assert result.squeeze_violation() <= 1e-8
        assert result.times == result.completed[0][1].times

    def test_to_dict(self, result):
        """Test the convergence summary."""
        data = result.to_dict()
        assert data["epsilons"] == SCHEDULE
        assert data["completed"] == SCHEDULE
        assert len(data["comparison"]) == 2
        assert data["failures"] == {}

    def test_workers_do_not_change_result(self, result):
        """Test a parallel sweep gives the same fields."""
        spec = make_problem(m=2.0, T=0.01)
        parallel = run_continuation(spec, SolverConfig(dt=1e-3), SCHEDULE, workers=3)

        for (_, a), (_, b) in zip(result.completed, parallel.completed):
            assert np.array_equal(a.as_arrays()[1], b.as_arrays()[1])
        assert parallel.cauchy_gaps == result.cauchy_gaps

    def test_failed_level_is_skipped(self):
        """Test a failing level is recorded and its neighbours are compared directly."""
        real = solve_regularized

        def flaky(spec, cfg):
            if spec.epsilon == 0.05:
                raise ConvergenceError(0.001, 1e-3, 100, 1.0)
            return real(spec, cfg)

        with patch("ddlab.continuation.solve_regularized", side_effect=flaky):
            result = run_continuation(make_problem(T=0.005), SolverConfig(dt=1e-3), SCHEDULE)

        assert result.trajectories[1] is None
        assert 0.05 in result.failures
        assert [eps for eps, _ in result.completed] == [0.1, 0.025]
        assert [(p.epsilon_small, p.epsilon_big) for p in result.monotonicity_report] == [(0.025, 0.1)]

    def test_invalid_schedule(self):
        """Test the sweep validates its schedule first."""
        with pytest.raises(ValueError):
            run_continuation(make_problem(), SolverConfig(), [0.1, 0.2])


@pytest.mark.slow
class TestFourLevelSweep:
    """The default four-level schedule in the m >= 1 regimes."""

    @pytest.mark.parametrize("m", [1.0, 2.0])
    def test_ordered_and_converging(self, m):
        """Test every adjacent pair is ordered and the gaps shrink."""
        assert geometric_schedule() == FULL_SCHEDULE
        spec = make_problem(m=m, T=0.02)
        result = run_continuation(spec, SolverConfig(dt=1e-3), FULL_SCHEDULE)

        assert [eps for eps, _ in result.completed] == FULL_SCHEDULE
        assert len(result.monotonicity_report) == 3
        assert result.comparison_passed
        assert all(p.max_violation <= comparison_tolerance(result.K) for p in result.monotonicity_report)
        assert np.all(np.diff(result.cauchy_gaps) < 0.0)
