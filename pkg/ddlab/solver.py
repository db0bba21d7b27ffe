"""
Implicit solver for the regularized problem in divergence form

    v_t = div(A_{eps,K}(v)^{p(x)-1} |Dv|^{p(x)-2} Dv),   v = Phi(u),

with Dirichlet data Phi(eps) and initial data Phi(u0 + eps). Each step is
backward Euler with Picard lagging: the face coefficients are frozen at the
current iterate and the resulting tridiagonal M-matrix system is solved
with scipy, until the max-norm change drops below picard_tol * (1 + max|v|).
The solution is mapped back with u = Psi(v).
"""

import logging
import math
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, List, NamedTuple, Optional, Tuple

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import spsolve

from ddlab.errors import BoundViolationError, ConvergenceError
from ddlab.grid import ExponentField, Grid, ScalarField, face_exponent, gradient, quadrature_weights
from ddlab.problem import ProblemSpec, SolverConfig
from ddlab.transforms import cutoff_A, phi, psi

logger = logging.getLogger("ddlab.solver")
logger.setLevel(logging.DEBUG)

BOUND_RTOL = 1e-8
# nodes closer than this (relative) share the nodal cutoff instead of a secant
SECANT_FLOOR = 1e-12
PROGRESS_FRACTION = 0.1


@dataclass(frozen=True)
class StepDiagnostics:
    """Per-snapshot diagnostics. dissipation and picard_iters accumulate since the previous snapshot."""

    time: float
    energy: float
    dissipation: float
    min_u: float
    max_u: float
    picard_iters: int
    substeps: int = 0

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass(eq=False)
class Trajectory:
    """Snapshots of one regularized solve."""

    epsilon: float
    times: List[float] = field(default_factory=list)
    u_snapshots: List[ScalarField] = field(default_factory=list)
    v_snapshots: List[ScalarField] = field(default_factory=list)
    diagnostics: List[StepDiagnostics] = field(default_factory=list)

    def append(self, time: float, v: ScalarField, u: ScalarField, diag: StepDiagnostics):
        self.times.append(time)
        self.v_snapshots.append(v)
        self.u_snapshots.append(u)
        self.diagnostics.append(diag)

    @property
    def grid(self) -> Grid:
        return self.u_snapshots[0].grid

    @property
    def energies(self) -> np.ndarray:
        return np.array([d.energy for d in self.diagnostics])

    @property
    def final_u(self) -> ScalarField:
        return self.u_snapshots[-1]

    def as_arrays(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(times, U, V) with one row per snapshot."""
        return (
            np.array(self.times),
            np.array([u.values for u in self.u_snapshots]),
            np.array([v.values for v in self.v_snapshots]),
        )

    def __len__(self) -> int:
        return len(self.times)


class StepResult(NamedTuple):
    """Outcome of one implicit step; v_next is the last iterate even if not converged."""

    v_next: ScalarField
    iterations: int
    change: float
    converged: bool


def energy(u: ScalarField, p: ExponentField) -> float:
    """E(u) = integral (1/p) |Du|^p over faces, p averaged to the faces."""
    pf = face_exponent(p).p
    du = np.abs(gradient(u).values)
    return float(np.dot(quadrature_weights(u.grid, "face"), du**pf / pf))


def initial_v(spec: ProblemSpec) -> ScalarField:
    """v(x, 0) = Phi(u0(x) + eps); boundary nodes equal Phi(eps)."""
    return spec.u0.with_values(phi(spec.u0.values + spec.epsilon, spec.regime))


def boundary_value(spec: ProblemSpec) -> float:
    return float(phi(spec.epsilon, spec.regime))


def face_coefficient(v: ScalarField, spec: ProblemSpec, cfg: SolverConfig) -> np.ndarray:
    """
    a_i = Abar_i^{pbar_i - 1} (g_i^2 + delta_g^2)^{(pbar_i - 2)/2}, g = Dv.

    Abar is the arithmetic mean of the nodal cutoff values, or for "secant"
    the slope |Psi(v_{i+1}) - Psi(v_i)| / |v_{i+1} - v_i| clamped to the
    cutoff band, which makes a_i g_i the u-flux |Du|^{p-2} Du of the face.
    """
    regime, cutoff = spec.regime, spec.cutoff
    values = v.values
    nodal = np.asarray(cutoff_A(values, regime, cutoff))
    mean = 0.5 * (nodal[:-1] + nodal[1:])

    if cfg.face_average == "secant":
        low, high = cutoff.band(regime)
        dv = np.diff(values)
        scale = 1.0 + np.maximum(np.abs(values[:-1]), np.abs(values[1:]))
        wide = np.abs(dv) > SECANT_FLOOR * scale
        du = np.diff(np.asarray(psi(values, regime)))
        with np.errstate(divide="ignore", invalid="ignore"):
            slope = np.abs(du) / np.where(wide, np.abs(dv), 1.0)
        a_bar = np.where(wide, np.clip(slope, low, high), mean)
    else:
        a_bar = mean

    pf = face_exponent(spec.p).p
    g = gradient(v).values
    with np.errstate(divide="ignore", over="ignore"):
        return a_bar ** (pf - 1.0) * (g**2 + cfg.delta_g**2) ** ((pf - 2.0) / 2.0)


def assemble_system(
    coeff: np.ndarray, v_n: ScalarField, boundary: float, dt: float
) -> Tuple[sparse.csc_matrix, np.ndarray]:
    """
    Frozen-coefficient backward Euler system M v = rhs.

    Interior rows: v_i - dt/h^2 (a_i (v_{i+1} - v_i) - a_{i-1} (v_i - v_{i-1})) = v_i^n.
    Boundary rows pin v to the Dirichlet value.
    """
    n = v_n.grid.n
    r = dt / v_n.grid.h**2
    main = np.ones(n)
    main[1:-1] += r * (coeff[:-1] + coeff[1:])
    lower = np.zeros(n - 1)
    upper = np.zeros(n - 1)
    lower[:-1] = -r * coeff[:-1]
    upper[1:] = -r * coeff[1:]
    matrix = sparse.diags([lower, main, upper], [-1, 0, 1], format="csc")

    rhs = np.array(v_n.values, dtype=float)
    rhs[0] = boundary
    rhs[-1] = boundary
    return matrix, rhs


def implicit_step(
    v_n: ScalarField, spec: ProblemSpec, cfg: SolverConfig, dt: Optional[float] = None
) -> StepResult:
    """
    One backward Euler step by Picard lagging.

    Iterations count linear solves; the first change is measured against
    v_n. A step that hits picard_max is returned with converged=False and
    its last change, the caller decides whether to halve dt.
    """
    dt = cfg.resolved_dt(spec.T) if dt is None else dt
    boundary = boundary_value(spec)
    current = v_n
    change = math.inf
    for iteration in range(1, cfg.picard_max + 1):
        matrix, rhs = assemble_system(face_coefficient(current, spec, cfg), v_n, boundary, dt)
        new_values = spsolve(matrix, rhs)
        if not np.all(np.isfinite(new_values)):
            logger.debug(f"picard iteration {iteration}: non-finite solution")
            return StepResult(current, iteration, math.inf, False)
        change = float(np.max(np.abs(new_values - current.values)))
        current = v_n.with_values(new_values)
        logger.debug(f"picard iteration {iteration}: change {change:.3e}")
        if change < cfg.picard_tol * (1.0 + float(np.max(np.abs(new_values)))):
            return StepResult(current, iteration, change, True)
    return StepResult(current, cfg.picard_max, change, False)


def _dissipation(v_old: np.ndarray, v_new: np.ndarray, u_old: np.ndarray, u_new: np.ndarray,
                 weights: np.ndarray, dt: float) -> float:
    # dt * integral w (du/dt)^2 with secant weight w = |dv| / |du|, i.e. integral |dv||du| / dt
    return float(np.dot(weights, np.abs(v_new - v_old) * np.abs(u_new - u_old))) / dt


class _Stepper:
    """Advances one problem, splitting failed steps into halves."""

    def __init__(self, spec: ProblemSpec, cfg: SolverConfig):
        self.spec = spec
        self.cfg = cfg
        self.weights = quadrature_weights(spec.grid)

    def advance(self, v: ScalarField, t: float, dt: float, depth: int = 0) -> Tuple[ScalarField, int, int, float]:
        """Returns (v_new, picard iterations, substeps, dissipation)."""
        result = implicit_step(v, self.spec, self.cfg, dt)
        if result.converged:
            u_old = np.asarray(psi(v.values, self.spec.regime))
            u_new = np.asarray(psi(result.v_next.values, self.spec.regime))
            diss = _dissipation(v.values, result.v_next.values, u_old, u_new, self.weights, dt)
            return result.v_next, result.iterations, 1, diss

        if depth >= self.cfg.max_halvings:
            logger.error(
                f"Picard failed at t={t:.6g} with dt={dt:.3g} after {depth} halvings "
                f"(last change {result.change:.3e})"
            )
            raise ConvergenceError(t, dt, result.iterations, result.change)

        logger.warning(f"Picard failed at t={t:.6g}, retrying with dt={dt / 2:.3g}")
        half = 0.5 * dt
        v_mid, it1, sub1, diss1 = self.advance(v, t, half, depth + 1)
        v_end, it2, sub2, diss2 = self.advance(v_mid, t + half, half, depth + 1)
        return v_end, result.iterations + it1 + it2, sub1 + sub2, diss1 + diss2


def check_bounds(v: ScalarField, spec: ProblemSpec, time: float):
    """
    Phi(eps) <= v <= Phi(K + eps) (reversed for m > 1) within 1e-8 (1 + |Phi(K + eps)|).

    Raises:
        BoundViolationError: on the first offending node
    """
    at_eps = boundary_value(spec)
    at_top = float(phi(spec.K + spec.epsilon, spec.regime))
    low, high = min(at_eps, at_top), max(at_eps, at_top)
    tol = BOUND_RTOL * (1.0 + abs(at_top))
    values = v.values
    bad = np.flatnonzero((values < low - tol) | (values > high + tol))
    if bad.size:
        node = int(bad[0])
        logger.error(f"bound violation at t={time:.6g}, node {node}: v={values[node]!r}")
        raise BoundViolationError(time, node, float(values[node]), f"allowed [{low!r}, {high!r}]")


def _snapshot_diag(time: float, u: ScalarField, spec: ProblemSpec, dissipation: float,
                   iterations: int, substeps: int) -> StepDiagnostics:
    return StepDiagnostics(
        time=time,
        energy=energy(u, spec.p),
        dissipation=dissipation,
        min_u=u.min(),
        max_u=u.max(),
        picard_iters=iterations,
        substeps=substeps,
    )


def solve_regularized(spec: ProblemSpec, cfg: SolverConfig) -> Trajectory:
    """
    March from 0 to T and record u = Psi(v) with diagnostics.

    The last step is shortened so the final time is exactly T. Bounds are
    checked after every accepted step.

    Raises:
        ConvergenceError: when a step fails after max_halvings halvings
        BoundViolationError: when the discrete maximum principle fails
        ValueError: when delta_g = 0 with p- < 2
    """
    if cfg.delta_g == 0.0 and spec.p.p_minus < 2.0:
        raise ValueError(f"delta_g must be positive when p- = {spec.p.p_minus} < 2")
    dt = cfg.resolved_dt(spec.T)
    n_steps = max(1, int(math.ceil(spec.T / dt - 1e-9)))
    stepper = _Stepper(spec, cfg)
    regime = spec.regime

    v = initial_v(spec)
    u = v.with_values(psi(v.values, regime))
    trajectory = Trajectory(epsilon=spec.epsilon)
    trajectory.append(0.0, v, u, _snapshot_diag(0.0, u, spec, 0.0, 0, 0))

    logger.info(
        f"solving m={spec.m}, p in [{spec.p.p_minus}, {spec.p.p_plus}], eps={spec.epsilon}, "
        f"{n_steps} steps of dt={dt:.3g}"
    )
    progress_every = max(1, int(n_steps * PROGRESS_FRACTION))
    t = 0.0
    pending_diss, pending_iters, pending_sub = 0.0, 0, 0
    for k in range(1, n_steps + 1):
        t_next = spec.T if k == n_steps else k * dt
        v, iterations, substeps, diss = stepper.advance(v, t, t_next - t)
        check_bounds(v, spec, t_next)
        t = t_next
        pending_diss += diss
        pending_iters += iterations
        pending_sub += substeps

        if k % cfg.snapshot_every == 0 or k == n_steps:
            u = v.with_values(psi(v.values, regime))
            trajectory.append(t, v, u, _snapshot_diag(t, u, spec, pending_diss, pending_iters, pending_sub))
            pending_diss, pending_iters, pending_sub = 0.0, 0, 0
        if k % progress_every == 0:
            logger.info(f"step {k}/{n_steps}, t={t:.4g}")

    return trajectory
