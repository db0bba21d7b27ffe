"""
The eps -> 0 sweep: one regularized solve per level of a decreasing
schedule, comparison checks between neighbours and a limit estimate.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from ddlab.errors import LabError
from ddlab.grid import ScalarField
from ddlab.problem import ProblemSpec, SolverConfig
from ddlab.solver import Trajectory, solve_regularized

logger = logging.getLogger("ddlab.continuation")
logger.setLevel(logging.DEBUG)

COMPARISON_RTOL = 1e-8
TIME_ATOL = 1e-12


def geometric_schedule(epsilon0: float = 0.1, levels: int = 4) -> List[float]:
    """eps_k = eps0 * 2^-k for k = 0 .. levels - 1."""
    if levels < 1:
        raise ValueError(f"levels must be >= 1, got {levels}")
    return [epsilon0 * 0.5**k for k in range(levels)]


def validate_schedule(schedule: List[float]):
    """
    Raises:
        ValueError: unless the schedule is nonempty, strictly decreasing and inside (0, 1]
    """
    if not schedule:
        raise ValueError("schedule must not be empty")
    for eps in schedule:
        if not (0.0 < eps <= 1.0):
            raise ValueError(f"schedule entries must lie in (0, 1], got {eps}")
    for big, small in zip(schedule, schedule[1:]):
        if not small < big:
            raise ValueError(f"schedule must be strictly decreasing, got {big} then {small}")


def comparison_tolerance(K: float) -> float:
    return COMPARISON_RTOL * (1.0 + K)


def _require_aligned(a: Trajectory, b: Trajectory):
    if a.grid != b.grid:
        raise ValueError("Trajectories live on different grids")
    if len(a.times) != len(b.times) or not np.allclose(a.times, b.times, rtol=0.0, atol=TIME_ATOL):
        raise ValueError("Trajectories record different times")


def comparison_check(traj_small: Trajectory, traj_big: Trajectory) -> float:
    """
    max over nodes and times of (u_small - u_big)_+.

    traj_small must come from the smaller eps; ordering holds when the
    result is at most 1e-8 (1 + K).

    Raises:
        ValueError: on mismatched grids or times
    """
    _require_aligned(traj_small, traj_big)
    _, u_small, _ = traj_small.as_arrays()
    _, u_big, _ = traj_big.as_arrays()
    return float(np.max(np.maximum(u_small - u_big, 0.0)))


@dataclass
class PairReport:
    """Comparison between two neighbouring levels."""

    epsilon_small: float
    epsilon_big: float
    max_violation: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.max_violation <= self.tolerance

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["passed"] = self.passed
        return data


@dataclass(eq=False)
class ContinuationResult:
    """
    Outcome of a sweep.

    trajectories holds None for a level whose solve failed (see failures).
    Pair reports and Cauchy gaps are between consecutive successful levels.
    """

    epsilons: List[float]
    trajectories: List[Optional[Trajectory]]
    K: float
    failures: Dict[float, str] = field(default_factory=dict)
    monotonicity_report: List[PairReport] = field(default_factory=list)
    cauchy_gaps: List[float] = field(default_factory=list)
    limit_estimate: List[ScalarField] = field(default_factory=list)

    @property
    def completed(self) -> List[Tuple[float, Trajectory]]:
        return [(eps, t) for eps, t in zip(self.epsilons, self.trajectories) if t is not None]

    @property
    def times(self) -> List[float]:
        completed = self.completed
        return list(completed[0][1].times) if completed else []

    @property
    def comparison_passed(self) -> bool:
        return all(pair.passed for pair in self.monotonicity_report)

    def squeeze_violation(self) -> float:
        """
        Largest breach of 0 <= limit <= u_eps over all levels and snapshots,
        and of limit <= smallest eps at the boundary nodes.
        """
        if not self.limit_estimate:
            return 0.0
        limit = np.array([f.values for f in self.limit_estimate])
        worst = max(0.0, float(-np.min(limit)))
        for _, traj in self.completed:
            _, u, _ = traj.as_arrays()
            worst = max(worst, float(np.max(limit - u)))
        smallest = self.completed[-1][0]
        boundary = np.concatenate([limit[:, 0], limit[:, -1]])
        worst = max(worst, float(np.max(boundary - smallest)))
        return worst

    def to_dict(self) -> Dict[str, Any]:
        """Convergence report (fields themselves go to CSV)."""
        return {
            "epsilons": list(self.epsilons),
            "completed": [eps for eps, _ in self.completed],
            "failures": {repr(eps): msg for eps, msg in self.failures.items()},
            "comparison": [pair.to_dict() for pair in self.monotonicity_report],
            "cauchy_gaps": list(self.cauchy_gaps),
            "squeeze_violation": self.squeeze_violation(),
        }


def _solve_level(spec: ProblemSpec, cfg: SolverConfig, eps: float) -> Tuple[Optional[Trajectory], Optional[str]]:
    logger.info(f"continuation level eps={eps}: starting")
    try:
        trajectory = solve_regularized(spec.with_epsilon(eps), cfg)
    except LabError as e:
        logger.warning(f"continuation level eps={eps} failed, keeping other levels: {e}")
        return None, str(e)
    logger.info(f"continuation level eps={eps}: done, {len(trajectory)} snapshots")
    return trajectory, None


def run_continuation(
    spec: ProblemSpec, cfg: SolverConfig, schedule: List[float], workers: int = 1
) -> ContinuationResult:
    """
    Solve every level of the schedule on the grid of spec (its own epsilon
    is ignored) and compare neighbouring levels.

    Levels run in a thread pool when workers > 1; results are merged in
    schedule order, so the outcome does not depend on workers.

    Raises:
        ValueError: for an invalid schedule
    """
    validate_schedule(schedule)
    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        outcomes = list(pool.map(lambda eps: _solve_level(spec, cfg, eps), schedule))

    result = ContinuationResult(
        epsilons=list(schedule),
        trajectories=[traj for traj, _ in outcomes],
        K=spec.K,
    )
    for eps, (_, error) in zip(schedule, outcomes):
        if error is not None:
            result.failures[eps] = error

    completed = result.completed
    tol = comparison_tolerance(spec.K)
    for (eps_big, big), (eps_small, small) in zip(completed, completed[1:]):
        violation = comparison_check(small, big)
        result.monotonicity_report.append(PairReport(eps_small, eps_big, violation, tol))
        _, u_small, _ = small.as_arrays()
        _, u_big, _ = big.as_arrays()
        result.cauchy_gaps.append(float(np.max(np.abs(u_big - u_small))))

    if completed:
        stack = np.array([traj.as_arrays()[1] for _, traj in completed])
        lowest = np.min(stack, axis=0)
        grid = completed[0][1].grid
        result.limit_estimate = [ScalarField(grid, row) for row in lowest]
    return result
