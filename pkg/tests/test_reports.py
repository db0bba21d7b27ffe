"""
Unit tests for reports module.
"""

import json
import math

import numpy as np
import pytest

from ddlab.reports import (
    FAILING,
    PASSING,
    SKIPPED,
    CheckResult,
    RunReport,
    format_check_result,
    format_report,
    read_report,
)


class TestCheckResult:
    """Tests for CheckResult."""

    def test_from_flag(self):
        """Test status from a boolean."""
        assert CheckResult.from_flag("a", True).status == PASSING
        assert CheckResult.from_flag("a", False).failing

    def test_unknown_status(self):
        """Test statuses are validated."""
        with pytest.raises(ValueError, match="Unknown check status"):
            CheckResult("a", "maybe")

    def test_to_dict_json_safe(self):
        """Test non-finite floats and numpy scalars become JSON values."""
        check = CheckResult.from_flag(
            "a", True, margin=math.inf, details={"x": np.float64(1.5), "y": [math.nan, 2]}
        )
        data = check.to_dict()

        assert data["margin"] is None
        assert data["details"] == {"x": 1.5, "y": [None, 2]}
        json.dumps(data, allow_nan=False)

    def test_round_trip(self):
        """Test from_dict(to_dict())."""
        check = CheckResult("a", SKIPPED, 0.5, 1e-8, {"k": 1})
        assert CheckResult.from_dict(check.to_dict()) == check


class TestRunReport:
    """Tests for RunReport."""

    def test_passed_and_counts(self):
        """Test a skipped check does not fail the run."""
        report = RunReport("solve", "0.1.0")
        report.add(CheckResult.from_flag("a", True))
        report.add(CheckResult("b", SKIPPED))
        assert report.passed
        assert report.counts() == {PASSING: 1, FAILING: 0, SKIPPED: 1}

        report.add(CheckResult.from_flag("c", False))
        assert not report.passed

    def test_empty_report_passes(self):
        """Test a report without checks passes."""
        assert RunReport("verify-lemmas", "0.1.0").passed

    def test_to_dict(self):
        """Test the serialized layout."""
        report = RunReport("solve", "0.1.0", seed=4, config={"mode": "solve"}, summary={"K": np.float64(1.0)})
        data = report.to_dict()

        assert data["passed"] is True
        assert data["seed"] == 4
        assert data["summary"] == {"K": 1.0}
        assert set(data) == {"mode", "version", "seed", "config", "checks", "summary", "passed", "counts"}

    def test_read_report(self, tmp_path):
        """Test reading a written report."""
        report = RunReport("barenblatt", "0.1.0", checks=[CheckResult.from_flag("x", False, margin=-1.0)])
        path = tmp_path / "report.json"
        path.write_text(json.dumps(report.to_dict()))

        loaded = read_report(path)
        assert loaded.mode == "barenblatt"
        assert loaded.checks[0].margin == -1.0
        assert not loaded.passed


class TestFormatting:
    """Tests for console formatting."""

    def test_format_check(self):
        """Test check lines."""
        assert format_check_result(CheckResult.from_flag("ok", True)) == "✓ ok"
        assert format_check_result(CheckResult.from_flag("bad", False)).startswith("✗ bad")
        assert "(skipped)" in format_check_result(CheckResult("s", SKIPPED))
        assert "margin 1.000e-03" in format_check_result(CheckResult.from_flag("m", True, margin=1e-3))

    def test_format_report(self):
        """Test the summary header."""
        report = RunReport("solve", "0.1.0", checks=[CheckResult.from_flag("a", False)])
        text = format_report(report)
        assert text.splitlines()[0] == "solve: FAIL (0 passing, 1 failing, 0 skipped)"
        assert "✗ a" in text
