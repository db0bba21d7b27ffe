"""
Pass/fail records for run reports.
"""

import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional

import numpy as np

PASSING = "passing"
FAILING = "failing"
SKIPPED = "skipped"
STATUSES = (PASSING, FAILING, SKIPPED)


def _json_safe(value: Any) -> Any:
    """Replace non-finite floats (not valid JSON) by None, recursively."""
    if isinstance(value, np.generic):
        value = value.item()
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if isinstance(value, dict):
        return {str(k): _json_safe(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_json_safe(v) for v in value]
    return value


@dataclass
class CheckResult:
    """One named check with its measured margin (>= 0 when satisfied)."""

    name: str
    status: str  # "passing", "failing", "skipped"
    margin: Optional[float] = None
    tolerance: Optional[float] = None
    details: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if self.status not in STATUSES:
            raise ValueError(f"Unknown check status '{self.status}'")

    @classmethod
    def from_flag(
        cls,
        name: str,
        passed: bool,
        margin: Optional[float] = None,
        tolerance: Optional[float] = None,
        details: Optional[Dict[str, Any]] = None,
    ) -> "CheckResult":
        return cls(name, PASSING if passed else FAILING, margin, tolerance, details or {})

    @property
    def failing(self) -> bool:
        return self.status == FAILING

    def to_dict(self) -> Dict[str, Any]:
        return _json_safe(asdict(self))

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "CheckResult":
        return cls(**data)


@dataclass
class RunReport:
    """Everything report.json carries: checks, config echo, version and seed."""

    mode: str
    version: str
    seed: Optional[int] = None
    config: Dict[str, Any] = field(default_factory=dict)
    checks: List[CheckResult] = field(default_factory=list)
    summary: Dict[str, Any] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return not any(check.failing for check in self.checks)

    def add(self, check: CheckResult) -> CheckResult:
        self.checks.append(check)
        return check

    def counts(self) -> Dict[str, int]:
        return {status: sum(1 for c in self.checks if c.status == status) for status in STATUSES}

    def to_dict(self) -> Dict[str, Any]:
        """Convert to dictionary for JSON serialization."""
        data = {
            "mode": self.mode,
            "version": self.version,
            "seed": self.seed,
            "config": self.config,
            "checks": [check.to_dict() for check in self.checks],
            "summary": self.summary,
            "passed": self.passed,
            "counts": self.counts(),
        }
        return _json_safe(data)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "RunReport":
        """Create from dictionary (loaded from JSON)."""
        return cls(
            mode=data["mode"],
            version=data["version"],
            seed=data.get("seed"),
            config=data.get("config", {}),
            checks=[CheckResult.from_dict(c) for c in data.get("checks", [])],
            summary=data.get("summary", {}),
        )


def read_report(path: Path) -> RunReport:
    with open(path, "r") as f:
        return RunReport.from_dict(json.load(f))


def format_check_result(check: CheckResult) -> str:
    """
    Format a check for display.

    Args:
        check: CheckResult object

    Returns:
        Formatted string
    """
    if check.status == PASSING:
        line = f"✓ {check.name}"
    elif check.status == FAILING:
        line = f"✗ {check.name}"
    else:
        line = f"- {check.name} (skipped)"
    if check.margin is not None:
        line += f"  margin {check.margin:.3e}"
    if check.tolerance is not None:
        line += f"  tol {check.tolerance:.1e}"
    return line


def format_report(report: RunReport) -> str:
    """Multi-line console summary of a run."""
    counts = report.counts()
    lines = [
        f"{report.mode}: {'PASS' if report.passed else 'FAIL'} "
        f"({counts[PASSING]} passing, {counts[FAILING]} failing, {counts[SKIPPED]} skipped)"
    ]
    lines.extend(f"  {format_check_result(check)}" for check in report.checks)
    return "\n".join(lines)
