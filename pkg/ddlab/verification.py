"""
Checks of solver output against the qualitative theory: support
non-expansion for m >= 1, the Barenblatt exact solution for 0 < m < 1 and
the a priori estimate integrals.
"""

import logging
import math
from dataclasses import asdict, dataclass, field, replace
from typing import Any, Dict, List, Optional

import numpy as np

from ddlab.grid import ExponentField, Grid, ScalarField, divergence, face_exponent, gradient
from ddlab.problem import ProblemSpec, SolverConfig
from ddlab.solver import Trajectory, energy, solve_regularized
from ddlab.transforms import Regime

logger = logging.getLogger("ddlab.verification")
logger.setLevel(logging.DEBUG)

BOUND_ATOL = 1e-8
ESTIMATE_SLACK = 1e-3
ENERGY_STEP_SLACK = 1e-6
# absolute floor so a static run (all integrals ~ 0) is not failed by roundoff
ESTIMATE_ATOL = 1e-12
INTERIOR_CELLS = 3
# the refinement error is measured on |x| <= CORE_FRACTION * edge(t); near the
# front the eps floor dominates and does not refine away
CORE_FRACTION = 0.5


# --- support masks ---------------------------------------------------------


@dataclass(frozen=True, eq=False)
class SupportMask:
    """Nodes where u exceeds delta_s."""

    grid: Grid
    mask: np.ndarray
    delta_s: float

    @property
    def count(self) -> int:
        return int(np.count_nonzero(self.mask))

    def dilate(self, cells: int) -> np.ndarray:
        """Boolean mask grown by the given number of cells on each side."""
        out = np.array(self.mask, dtype=bool)
        for shift in range(1, cells + 1):
            out[shift:] |= self.mask[:-shift]
            out[:-shift] |= self.mask[shift:]
        return out

    def issubset(self, other: np.ndarray) -> bool:
        return bool(np.all(~self.mask | np.asarray(other, dtype=bool)))


def support_mask(u: ScalarField, delta_s: float) -> SupportMask:
    """mask_i <=> u_i > delta_s."""
    if not delta_s > 0.0:
        raise ValueError(f"delta_s must be positive, got {delta_s}")
    return SupportMask(u.grid, u.values > delta_s, delta_s)


@dataclass
class SupportReport:
    """
    Support containment over a trajectory.

    max_escape_cells is the largest distance, in cells, from a node of a
    thresholded snapshot to the initial support; containment holds when it
    is at most dilation_cells.
    """

    passed: bool
    delta_s: float
    dilation_cells: int
    epsilon: float
    max_escape_cells: float
    first_failure_time: Optional[float] = None
    initial_support_nodes: int = 0
    snapshots: int = 0

    @property
    def margin(self) -> float:
        return self.dilation_cells - self.max_escape_cells

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        if math.isinf(self.max_escape_cells):
            data["max_escape_cells"] = None
        return data


def _distance_to(indices: np.ndarray, n: int) -> np.ndarray:
    nodes = np.arange(n)
    if indices.size == 0:
        return np.full(n, np.inf)
    return np.min(np.abs(nodes[:, None] - indices[None, :]), axis=1).astype(float)


def support_nonexpansion_check(
    traj: Trajectory,
    delta_s: float,
    dilation_cells: int = 1,
    u0: Optional[ScalarField] = None,
) -> SupportReport:
    """
    Pass iff every snapshot's mask at delta_s lies in the support of u0
    (u0 > 0) grown by dilation_cells cells.

    u0 defaults to the first snapshot minus the trajectory's eps.

    The regularized front creeps a fixed distance (about 0.02 for eps = 1e-3,
    delta_s = 0.01) rather than a fixed number of cells, so one cell of
    dilation covers it only for h >= 0.02; scale dilation_cells with 1/h on
    finer grids.

    Raises:
        ValueError: if delta_s <= 2 eps, where the regularization floor would
            pollute the mask
    """
    eps = traj.epsilon
    if delta_s <= 2.0 * eps:
        raise ValueError(f"delta_s={delta_s} must exceed 2*eps={2.0 * eps}")
    if u0 is None:
        first = traj.u_snapshots[0]
        initial = np.flatnonzero(first.values > eps * (1.0 + 1e-9))
    else:
        initial = np.flatnonzero(u0.values > 0.0)

    distance = _distance_to(initial, traj.grid.n)
    report = SupportReport(
        passed=True,
        delta_s=delta_s,
        dilation_cells=dilation_cells,
        epsilon=eps,
        max_escape_cells=0.0,
        initial_support_nodes=int(initial.size),
        snapshots=len(traj),
    )
    for t, u in zip(traj.times, traj.u_snapshots):
        mask = support_mask(u, delta_s).mask
        if not np.any(mask):
            continue
        escape = float(np.max(distance[mask]))
        report.max_escape_cells = max(report.max_escape_cells, escape)
        if escape > dilation_cells and report.first_failure_time is None:
            report.first_failure_time = t
            logger.info(f"support escaped by {escape} cells at t={t:.6g}")
    report.passed = report.first_failure_time is None
    return report


# --- Barenblatt solution ---------------------------------------------------


@dataclass(frozen=True)
class BarenblattParams:
    """
    Parameters of B(x, t) = s^-gamma (1 - (m gamma / 2N) |x|^2 / s^{1 - m gamma})_+^{1/m},
    s = t + t0, gamma = N / (m N + 2 - 2m).
    """

    m: float
    t0: float
    N: int = 1
    gamma: float = field(init=False)

    def __post_init__(self):
        if not 0.0 < self.m < 1.0:
            raise ValueError(f"Barenblatt profile needs 0 < m < 1, got {self.m}")
        if self.N != 1:
            raise ValueError(f"Only N = 1 is supported, got {self.N}")
        if not self.t0 > 0.0:
            raise ValueError(f"t0 must be positive, got {self.t0}")
        object.__setattr__(self, "gamma", self.N / (self.m * self.N + 2.0 - 2.0 * self.m))

    @property
    def m_gamma(self) -> float:
        return self.m * self.gamma


def barenblatt_value(x: Any, t: float, bp: BarenblattParams) -> Any:
    """B(x, t); scalar in, float out."""
    if t < 0.0:
        raise ValueError(f"t must be >= 0, got {t}")
    s = t + bp.t0
    arr = np.asarray(x, dtype=float)
    bracket = 1.0 - (bp.m_gamma / (2.0 * bp.N)) * arr**2 / s ** (1.0 - bp.m_gamma)
    out = s ** (-bp.gamma) * np.maximum(bracket, 0.0) ** (1.0 / bp.m)
    return float(out) if np.ndim(x) == 0 else out


def barenblatt_field(grid: Grid, t: float, bp: BarenblattParams) -> ScalarField:
    return ScalarField(grid, barenblatt_value(grid.nodes, t, bp))


def barenblatt_edge(t: float, bp: BarenblattParams) -> float:
    """|x| of the support edge: sqrt(2N s^{1 - m gamma} / (m gamma))."""
    s = t + bp.t0
    return math.sqrt(2.0 * bp.N * s ** (1.0 - bp.m_gamma) / bp.m_gamma)


def barenblatt_level(t: float, level: float, bp: BarenblattParams) -> float:
    """|x| where B(., t) equals level; the edge for level <= 0, 0 above the peak."""
    if level <= 0.0:
        return barenblatt_edge(t, bp)
    s = t + bp.t0
    inner = 1.0 - (level * s**bp.gamma) ** bp.m
    if inner <= 0.0:
        return 0.0
    return math.sqrt(inner * s ** (1.0 - bp.m_gamma) * 2.0 * bp.N / bp.m_gamma)


def barenblatt_residual(bp: BarenblattParams, grid: Grid, t: float, h_t: float) -> float:
    """
    max |B^m (second difference of B) - (time difference of B)| over interior
    nodes at least 3 cells inside the support.

    The time difference is central when t >= h_t and the second order
    one-sided formula otherwise.
    """
    if not h_t > 0.0:
        raise ValueError(f"h_t must be positive, got {h_t}")
    x = grid.nodes
    b = barenblatt_value(x, t, bp)
    lap = np.zeros_like(b)
    lap[1:-1] = (b[2:] - 2.0 * b[1:-1] + b[:-2]) / grid.h**2
    if t >= h_t:
        rate = (barenblatt_value(x, t + h_t, bp) - barenblatt_value(x, t - h_t, bp)) / (2.0 * h_t)
        t_min = t - h_t
    else:
        rate = (
            -3.0 * b + 4.0 * barenblatt_value(x, t + h_t, bp) - barenblatt_value(x, t + 2.0 * h_t, bp)
        ) / (2.0 * h_t)
        t_min = t
    inside = np.abs(x) <= barenblatt_edge(t_min, bp) - INTERIOR_CELLS * grid.h
    inside[0] = inside[-1] = False
    if not np.any(inside):
        return 0.0
    return float(np.max(np.abs(b[inside] ** bp.m * lap[inside] - rate[inside])))


def measured_edge(u: ScalarField, delta_s: float) -> float:
    """
    Rightmost x where u crosses delta_s, linearly interpolated between the
    last node above and the next node; nan when no node is above.
    """
    above = np.flatnonzero(u.values > delta_s)
    if above.size == 0:
        return math.nan
    j = int(above[-1])
    x = u.x
    if j == u.values.size - 1:
        return float(x[-1])
    hi, lo = u.values[j], u.values[j + 1]
    return float(x[j] + (x[j + 1] - x[j]) * (hi - delta_s) / (hi - lo))


@dataclass
class EdgeReport:
    """Measured threshold edge against the exact profile, per snapshot."""

    passed: bool
    delta_s: float
    tolerance: float
    times: List[float] = field(default_factory=list)
    measured: List[float] = field(default_factory=list)
    expected: List[float] = field(default_factory=list)
    support_edge: List[float] = field(default_factory=list)
    max_deviation: float = 0.0
    growth: float = 0.0

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


def edge_growth_check(
    traj: Trajectory, bp: BarenblattParams, delta_s: float, cells: float = 1.0
) -> EdgeReport:
    """
    Compare the measured delta_s edge with the delta_s edge of B + eps on the
    same grid at every snapshot. Both go through `measured_edge`, so the
    linear interpolation between nodes biases them alike.

    Passes iff every deviation is within `cells` cells and the measured edge
    moved outward by more than that over the run.
    """
    grid = traj.grid
    report = EdgeReport(passed=True, delta_s=delta_s, tolerance=cells * grid.h)
    for t, u in zip(traj.times, traj.u_snapshots):
        exact = ScalarField(grid, barenblatt_value(grid.nodes, t, bp) + traj.epsilon)
        report.times.append(t)
        report.measured.append(measured_edge(u, delta_s))
        report.expected.append(measured_edge(exact, delta_s))
        report.support_edge.append(barenblatt_edge(t, bp))
    deviation = np.abs(np.array(report.measured) - np.array(report.expected))
    report.max_deviation = float(np.max(deviation)) if deviation.size else 0.0
    report.growth = report.measured[-1] - report.measured[0] if report.measured else 0.0
    report.passed = bool(
        np.all(np.isfinite(deviation))
        and report.max_deviation <= report.tolerance
        and report.growth > report.tolerance
    )
    return report


@dataclass
class BarenblattRun:
    """Regularized solve from Barenblatt data and its errors against B."""

    trajectory: Trajectory
    errors: List[float]
    interior_errors: List[float]

    @property
    def final_error(self) -> float:
        return self.errors[-1]

    @property
    def final_interior_error(self) -> float:
        return self.interior_errors[-1]


def barenblatt_problem(bp: BarenblattParams, grid: Grid, T: float, epsilon: float) -> ProblemSpec:
    """p == 2 problem whose initial datum is B(., 0) with zero boundary nodes."""
    values = np.array(barenblatt_value(grid.nodes, 0.0, bp))
    values[0] = values[-1] = 0.0
    return ProblemSpec(
        grid=grid,
        regime=Regime(bp.m),
        p=ExponentField.constant(grid, 2.0),
        u0=ScalarField(grid, values),
        T=T,
        epsilon=epsilon,
    )


def barenblatt_run(
    bp: BarenblattParams,
    grid: Grid,
    T: float,
    dt: float,
    epsilon: float,
    cfg: Optional[SolverConfig] = None,
) -> BarenblattRun:
    """
    Solve from Barenblatt data and record max-norm errors against B per
    snapshot, over all nodes and over the core |x| <= CORE_FRACTION * edge(t).
    """
    cfg = replace(cfg or SolverConfig(), dt=dt)
    trajectory = solve_regularized(barenblatt_problem(bp, grid, T, epsilon), cfg)
    errors, interior = [], []
    x = grid.nodes
    for t, u in zip(trajectory.times, trajectory.u_snapshots):
        exact = barenblatt_value(x, t, bp)
        diff = np.abs(u.values - exact)
        errors.append(float(np.max(diff)))
        inside = np.abs(x) <= CORE_FRACTION * barenblatt_edge(t, bp)
        interior.append(float(np.max(diff[inside])) if np.any(inside) else 0.0)
    logger.info(f"Barenblatt run: final max error {errors[-1]:.3e}")
    return BarenblattRun(trajectory, errors, interior)


# --- a priori estimates ----------------------------------------------------


@dataclass
class IntegralEstimates:
    """Discrete a priori integrals of one trajectory against C = E(0) (1 + slack)."""

    weighted_dissipation: float
    sup_energy: float
    initial_energy: float
    final_energy: float
    bound: float
    min_u: float
    max_u: float
    energy_nonincreasing: bool
    energy_ok: bool
    bounds_ok: bool

    @property
    def passed(self) -> bool:
        return self.energy_ok and self.bounds_ok and self.energy_nonincreasing

    @property
    def margin(self) -> float:
        """Room left in weighted_dissipation + E(T) <= C."""
        return self.bound - (self.weighted_dissipation + self.final_energy)

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["passed"] = self.passed
        return data


def estimate_integrals(traj: Trajectory, spec: ProblemSpec) -> IntegralEstimates:
    """
    Weighted dissipation sum_n dt integral w (du/dt)^2, sup_t E(t), and the
    bound eps <= u <= K + eps, all against C = E(u0) (1 + 1e-3).
    """
    energies = traj.energies
    e0 = energy(spec.u0, spec.p)
    bound = e0 * (1.0 + ESTIMATE_SLACK) + ESTIMATE_ATOL
    dissipation = float(sum(d.dissipation for d in traj.diagnostics))
    sup_energy = float(np.max(energies))
    final_energy = float(energies[-1])
    step_slack = ENERGY_STEP_SLACK * (1.0 + e0) + ESTIMATE_ATOL
    nonincreasing = bool(np.all(np.diff(energies) <= step_slack))
    min_u = min(d.min_u for d in traj.diagnostics)
    max_u = max(d.max_u for d in traj.diagnostics)
    return IntegralEstimates(
        weighted_dissipation=dissipation,
        sup_energy=sup_energy,
        initial_energy=e0,
        final_energy=final_energy,
        bound=bound,
        min_u=min_u,
        max_u=max_u,
        energy_nonincreasing=nonincreasing,
        energy_ok=sup_energy <= bound and dissipation + final_energy <= bound,
        bounds_ok=(
            min_u >= spec.epsilon - BOUND_ATOL and max_u <= spec.K + spec.epsilon + BOUND_ATOL
        ),
    )


def equation_residual(traj: Trajectory, spec: ProblemSpec) -> float:
    """
    max over interior nodes and snapshot pairs of
    |(u1 - u0)/dt - u1^m div(|Du1|^{p-2} Du1)| / (1 + max |(u1 - u0)/dt|).

    Diagnostic only: checks the output against the non-divergence equation.
    """
    pf = face_exponent(spec.p).p
    worst = 0.0
    for (t0, u0), (t1, u1) in zip(
        zip(traj.times, traj.u_snapshots), zip(traj.times[1:], traj.u_snapshots[1:])
    ):
        rate = (u1.values - u0.values) / (t1 - t0)
        g = gradient(u1).values
        mag = np.abs(g)
        with np.errstate(divide="ignore", invalid="ignore"):
            flux = np.where(mag > 0.0, np.where(mag > 0.0, mag, 1.0) ** (pf - 2.0) * g, 0.0)
        rhs = u1.values**spec.m * divergence(ScalarField(u1.grid, flux, "face")).values
        diff = np.abs(rate - rhs)[1:-1]
        worst = max(worst, float(np.max(diff)) / (1.0 + float(np.max(np.abs(rate)))))
    return worst
