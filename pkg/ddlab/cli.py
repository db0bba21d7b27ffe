"""
ddlab CLI - command routing and handlers
"""

import logging
import sys
from dataclasses import replace
from typing import List, Optional

import click
import numpy as np

from ddlab import __version__
from ddlab.config import ProblemConfig, RunConfig, VerificationConfig, load_config
from ddlab.continuation import run_continuation
from ddlab.errors import ConfigError, LabError
from ddlab.fuzz import combine_summaries, fuzz_fields, fuzz_pointwise
from ddlab.grid import Grid
from ddlab.outputs import emit_outputs, write_barenblatt_table
from ddlab.problem import ProblemSpec, SolverConfig
from ddlab.reports import SKIPPED, CheckResult, RunReport, format_report
from ddlab.solver import Trajectory, solve_regularized
from ddlab.utils import (
    configure_logging,
    console,
    describe_path,
    ensure_dir,
    parse_csv_floats,
    print_error,
    print_info,
    print_success,
    print_warning,
)
from ddlab.verification import (
    BarenblattParams,
    barenblatt_residual,
    barenblatt_run,
    barenblatt_value,
    edge_growth_check,
    equation_residual,
    estimate_integrals,
    support_nonexpansion_check,
)

logger = logging.getLogger("ddlab.cli")
logger.setLevel(logging.DEBUG)

EXIT_FAILED = 1
EXIT_USAGE = 2

BARENBLATT_ERROR_TOL = 5e-2
RESIDUAL_RATIO_MIN = 3.0


def _load(config_path: str, mode: str) -> RunConfig:
    """Load a config for one subcommand; exits with code 2 on any config error."""
    try:
        config = load_config(config_path)
    except ConfigError as e:
        print_error(f"Invalid config: {e}")
        sys.exit(EXIT_USAGE)
    if config.mode != mode:
        print_warning(f"Config mode is '{config.mode}', running '{mode}'")
        config = replace(config, mode=mode)
    if config.problem is None:
        print_error("Invalid config: problem: this mode needs a problem section")
        sys.exit(EXIT_USAGE)
    return config


def _build(config: RunConfig, epsilon: Optional[float] = None) -> ProblemSpec:
    try:
        return config.build_problem(epsilon)
    except ConfigError as e:
        print_error(f"Invalid config: {e}")
        sys.exit(EXIT_USAGE)


def _finish(report: RunReport, result, out: str):
    """Write outputs, print the summary and exit 0 iff every check passed."""
    try:
        written = emit_outputs(result, report, out)
    except LabError as e:
        print_error(str(e))
        sys.exit(EXIT_FAILED)
    console.print(format_report(report))
    print_info(f"Wrote {len(written)} files to {describe_path(ensure_dir(out))}")
    if report.passed:
        print_success("All checks passed")
        sys.exit(0)
    print_error("Some checks failed")
    sys.exit(EXIT_FAILED)


def trajectory_checks(traj: Trajectory, spec: ProblemSpec) -> List[CheckResult]:
    """Maximum principle and the a priori energy estimates of one solve."""
    estimates = estimate_integrals(traj, spec)
    lower_margin = estimates.min_u - spec.epsilon
    upper_margin = spec.K + spec.epsilon - estimates.max_u
    return [
        CheckResult.from_flag(
            "maximum_principle",
            estimates.bounds_ok,
            margin=min(lower_margin, upper_margin),
            tolerance=1e-8,
            details={"min_u": estimates.min_u, "max_u": estimates.max_u},
        ),
        CheckResult.from_flag(
            "energy_nonincreasing",
            estimates.energy_nonincreasing,
            margin=float(-np.max(np.diff(traj.energies))) if len(traj) > 1 else 0.0,
            tolerance=1e-6 * (1.0 + estimates.initial_energy),
        ),
        CheckResult.from_flag(
            "energy_estimates",
            estimates.energy_ok,
            margin=estimates.margin,
            tolerance=1e-3,
            details=estimates.to_dict(),
        ),
    ]


@click.group()
@click.version_option(version=__version__, prog_name="ddlab")
@click.option("--verbose", "-v", count=True, help="Log progress (-v) or Picard iterations (-vv)")
@click.pass_context
def cli(ctx, verbose: int):
    """
    ddlab - numerical lab for the doubly degenerate equation u_t = u^m div(|Du|^{p(x)-2} Du).

    Solves the eps-regularized problem, runs the eps -> 0 continuation and
    checks the qualitative theory on the output.
    """
    configure_logging(verbose)


@cli.command()
@click.option("--config", "config_path", required=True, help="Run config (JSON)")
@click.option("--out", required=True, help="Output directory")
def solve(config_path: str, out: str):
    """
    Solve one regularized problem and check its estimates.

    \b
    Examples:
        ddlab solve --config bump.json --out runs/bump
    """
    config = _load(config_path, "solve")
    spec = _build(config)
    report = RunReport("solve", __version__, config.verification.seed, config.to_dict())
    try:
        traj = solve_regularized(spec, config.solver)
    except LabError as e:
        print_error(str(e))
        report.add(CheckResult.from_flag("solve", False, details={"error": str(e)}))
        _finish(report, None, out)
        return

    for check in trajectory_checks(traj, spec):
        report.add(check)
    report.summary = {
        "snapshots": len(traj),
        "K": spec.K,
        "final_energy": float(traj.energies[-1]),
        "equation_residual": equation_residual(traj, spec),
        "picard_iterations": sum(d.picard_iters for d in traj.diagnostics),
    }
    _finish(report, traj, out)


@cli.command()
@click.option("--config", "config_path", required=True, help="Run config (JSON)")
@click.option("--out", required=True, help="Output directory")
def continuation(config_path: str, out: str):
    """
    Run the eps -> 0 continuation and check the comparison principle.

    \b
    Examples:
        ddlab continuation --config bump.json --out runs/limit
    """
    config = _load(config_path, "continuation")
    schedule = config.problem.resolved_schedule()
    spec = _build(config, schedule[0])
    report = RunReport("continuation", __version__, config.verification.seed, config.to_dict())

    result = run_continuation(spec, config.solver, schedule, workers=config.problem.workers)
    for eps, message in result.failures.items():
        report.add(CheckResult.from_flag(f"solve eps={eps!r}", False, details={"error": message}))
    for pair in result.monotonicity_report:
        report.add(
            CheckResult.from_flag(
                f"comparison eps={pair.epsilon_small!r} <= eps={pair.epsilon_big!r}",
                pair.passed,
                margin=pair.tolerance - pair.max_violation,
                tolerance=pair.tolerance,
                details=pair.to_dict(),
            )
        )
    if result.completed:
        squeeze = result.squeeze_violation()
        tol = 1e-8 * (1.0 + spec.K)
        report.add(CheckResult.from_flag("squeeze", squeeze <= tol, margin=tol - squeeze, tolerance=tol))
    report.summary = result.to_dict()
    _finish(report, result, out)


@cli.command("verify-lemmas")
@click.option("--samples", default=1_000_000, show_default=True, help="Pointwise samples")
@click.option("--trials", default=10_000, show_default=True, help="Field-level trials per oracle")
@click.option("--seed", default=0, show_default=True, help="Seed of every random stream")
@click.option("--workers", default=1, show_default=True, help="Worker threads")
@click.option("--out", required=True, help="Output directory")
def verify_lemmas(samples: int, trials: int, seed: int, workers: int, out: str):
    """
    Fuzz the monotonicity and variable exponent inequalities.

    \b
    Examples:
        ddlab verify-lemmas --samples 1000000 --seed 7 --out runs/lemmas
    """
    if samples < 0 or trials < 0 or workers < 1:
        print_error("samples and trials must be >= 0 and workers >= 1")
        sys.exit(EXIT_USAGE)
    config = RunConfig(
        "verify-lemmas", verification=VerificationConfig(seed=seed, samples=samples, trials=trials)
    )
    report = RunReport("verify-lemmas", __version__, seed, config.to_dict())

    summaries = [fuzz_pointwise(samples, seed, workers)] + fuzz_fields(trials, seed, workers)
    for summary in summaries:
        report.add(
            CheckResult.from_flag(
                summary.name,
                summary.violations == 0,
                margin=summary.worst_margin if summary.samples else None,
                details=summary.to_dict(),
            )
        )
    report.summary = combine_summaries("all", summaries).to_dict()
    _finish(report, None, out)


@cli.command()
@click.option("--m", "m", type=float, required=True, help="Exponent m in (0, 1)")
@click.option("--t0", type=float, default=1.0, show_default=True, help="Time shift t0")
@click.option("--grid", "grid_text", default="-4,4,201", show_default=True, help="a,b,n")
@click.option("--times", "times_text", default="0,0.25,0.5", show_default=True, help="t1,t2,...")
@click.option("--h-t", "h_t", type=float, default=1e-4, show_default=True, help="Residual time step")
@click.option("--solve/--no-solve", "run_solver", default=False, help="Also run the regularized solver")
@click.option("--epsilon", type=float, default=1e-3, show_default=True, help="Regularization for --solve")
@click.option("--dt", type=float, default=5e-4, show_default=True, help="Time step for --solve")
@click.option("--delta-s", type=float, default=0.01, show_default=True, help="Edge threshold")
@click.option("--out", required=True, help="Output directory")
def barenblatt(
    m: float,
    t0: float,
    grid_text: str,
    times_text: str,
    h_t: float,
    run_solver: bool,
    epsilon: float,
    dt: float,
    delta_s: float,
    out: str,
):
    """
    Tabulate the Barenblatt solution, check its residual and optionally
    compare the regularized solver against it.

    \b
    Examples:
        ddlab barenblatt --m 0.5 --t0 1 --grid -4,4,201 --times 0,0.5 --out runs/bb
        ddlab barenblatt --m 0.5 --times 0,0.25,0.5 --solve --out runs/bb
    """
    try:
        a, b, n = parse_csv_floats(grid_text)
        grid = Grid(a, b, int(n))
        times = sorted(parse_csv_floats(times_text))
        bp = BarenblattParams(m=m, t0=t0)
        solver_cfg = SolverConfig(dt=dt)
        problem = ProblemConfig(
            m=m, grid=grid, T=max(times[-1], dt), u0=f"barenblatt:{t0!r}", epsilon=epsilon
        )
    except ValueError as e:
        print_error(f"Invalid arguments: {e}")
        sys.exit(EXIT_USAGE)
    if any(t < 0.0 for t in times):
        print_error("times must be >= 0")
        sys.exit(EXIT_USAGE)

    config = RunConfig(
        "barenblatt",
        problem=problem,
        solver=solver_cfg,
        verification=VerificationConfig(delta_s=delta_s),
    )
    report = RunReport("barenblatt", __version__, None, config.to_dict())

    try:
        write_barenblatt_table(
            grid, times, [barenblatt_value(grid.nodes, t, bp) for t in times], ensure_dir(out)
        )
    except (LabError, OSError) as e:
        print_error(str(e))
        sys.exit(EXIT_FAILED)
    residuals = {}
    for t in times:
        coarse = barenblatt_residual(bp, grid, t, h_t)
        fine = barenblatt_residual(bp, grid.refine(), t, h_t)
        residuals[repr(t)] = {"coarse": coarse, "fine": fine}
        if coarse == 0.0 or fine == 0.0:
            report.add(CheckResult(f"residual_refinement t={t!r}", SKIPPED, details=residuals[repr(t)]))
            continue
        ratio = coarse / fine
        report.add(
            CheckResult.from_flag(
                f"residual_refinement t={t!r}",
                ratio >= RESIDUAL_RATIO_MIN,
                margin=ratio - RESIDUAL_RATIO_MIN,
                details={"coarse": coarse, "fine": fine, "ratio": ratio},
            )
        )
    report.summary = {"gamma": bp.gamma, "residuals": residuals}

    if run_solver:
        try:
            run = barenblatt_run(bp, grid, problem.T, dt, epsilon, solver_cfg)
            refined = barenblatt_run(bp, grid.refine(), problem.T, dt / 2.0, epsilon, solver_cfg)
        except (LabError, ValueError) as e:
            print_error(str(e))
            report.add(CheckResult.from_flag("barenblatt_solve", False, details={"error": str(e)}))
            _finish(report, None, out)
            return
        report.add(
            CheckResult.from_flag(
                "barenblatt_error",
                run.final_error <= BARENBLATT_ERROR_TOL,
                margin=BARENBLATT_ERROR_TOL - run.final_error,
                tolerance=BARENBLATT_ERROR_TOL,
                details={"final_error": run.final_error, "refined_error": refined.final_error},
            )
        )
        report.add(
            CheckResult.from_flag(
                "barenblatt_refinement",
                refined.final_interior_error < run.final_interior_error,
                margin=run.final_interior_error - refined.final_interior_error,
                details={
                    "interior_error": run.final_interior_error,
                    "refined_interior_error": refined.final_interior_error,
                },
            )
        )
        edges = edge_growth_check(run.trajectory, bp, delta_s)
        report.add(
            CheckResult.from_flag(
                "edge_growth",
                edges.passed,
                margin=edges.tolerance - edges.max_deviation,
                tolerance=edges.tolerance,
                details=edges.to_dict(),
            )
        )
        if delta_s > 2.0 * epsilon:
            support = support_nonexpansion_check(run.trajectory, delta_s, 1)
            # for 0 < m < 1 the support is expected to grow
            report.add(
                CheckResult.from_flag(
                    "support_expands",
                    not support.passed,
                    margin=support.max_escape_cells - support.dilation_cells,
                    details=support.to_dict(),
                )
            )
        report.summary["errors"] = run.errors
        _finish(report, run.trajectory, out)
        return

    _finish(report, None, out)


@cli.command("support-check")
@click.option("--config", "config_path", required=True, help="Run config (JSON)")
@click.option("--out", required=True, help="Output directory")
def support_check(config_path: str, out: str):
    """
    Solve and check that the support never grows beyond that of u0.

    \b
    Examples:
        ddlab support-check --config bump_m2.json --out runs/support
    """
    config = _load(config_path, "support-check")
    spec = _build(config)
    vc = config.verification
    if vc.delta_s <= 2.0 * spec.epsilon:
        print_error(f"Invalid config: verification.delta_s must exceed 2*epsilon = {2.0 * spec.epsilon}")
        sys.exit(EXIT_USAGE)
    report = RunReport("support-check", __version__, vc.seed, config.to_dict())
    try:
        traj = solve_regularized(spec, config.solver)
    except LabError as e:
        print_error(str(e))
        report.add(CheckResult.from_flag("solve", False, details={"error": str(e)}))
        _finish(report, None, out)
        return

    support = support_nonexpansion_check(traj, vc.delta_s, vc.dilation_cells, u0=spec.u0)
    if spec.m < 1.0:
        print_warning("m < 1: the support is expected to grow, containment will likely fail")
    report.add(
        CheckResult.from_flag(
            "support_nonexpansion",
            support.passed,
            margin=support.margin,
            tolerance=float(vc.dilation_cells),
            details=support.to_dict(),
        )
    )
    for check in trajectory_checks(traj, spec):
        report.add(check)
    report.summary = {"snapshots": len(traj), "K": spec.K}
    _finish(report, traj, out)


def main():
    """Entry point for the CLI."""
    try:
        cli()
    except KeyboardInterrupt:
        print_info("\n\nInterrupted by user")
        sys.exit(130)
    except Exception as e:
        print_error(f"Unexpected error: {e}")
        import traceback

        traceback.print_exc()
        sys.exit(1)


if __name__ == "__main__":
    main()
