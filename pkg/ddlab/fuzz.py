"""
Randomized sweeps of the inequality oracles.

Every oracle draws from its own child stream of one SeedSequence, so a
summary depends only on (seed, samples) and never on worker count or order.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from typing import Any, Callable, Dict, List, Tuple

import numpy as np

from ddlab.grid import ExponentField, Grid, ScalarField
from ddlab.inequalities import (
    FIELD_RTOL,
    field_monotonicity_gap,
    monotonicity_gap_batch,
)
from ddlab.lebesgue import holder_check, modular_norm_bracket_check, modular_norm_bracket_margin

logger = logging.getLogger("ddlab.fuzz")
logger.setLevel(logging.DEBUG)

POINTWISE_CHUNK = 100_000
P_RANGE = (1.0, 10.0)
ENTRY_RANGE = (-10.0, 10.0)
DIMENSIONS = (1, 2, 3)


@dataclass
class FuzzSummary:
    """Outcome of one oracle sweep; worst_margin is the smallest normalized slack seen."""

    name: str
    samples: int = 0
    violations: int = 0
    worst_margin: float = float("inf")

    def record(self, margins: np.ndarray, ok: np.ndarray):
        margins = np.asarray(margins, dtype=float).reshape(-1)
        self.samples += int(margins.size)
        self.violations += int(np.count_nonzero(~np.asarray(ok, dtype=bool)))
        if margins.size:
            self.worst_margin = min(self.worst_margin, float(np.min(margins)))

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        # an empty sweep has no margin; JSON has no infinity
        if self.samples == 0:
            data["worst_margin"] = None
        return data


def combine_summaries(name: str, summaries: List[FuzzSummary]) -> FuzzSummary:
    """Totals across sweeps; worst margin is the overall minimum."""
    total = FuzzSummary(name)
    for summary in summaries:
        total.samples += summary.samples
        total.violations += summary.violations
        total.worst_margin = min(total.worst_margin, summary.worst_margin)
    return total


def _pointwise_chunk(seed: np.random.SeedSequence, count: int) -> Tuple[np.ndarray, np.ndarray]:
    rng = np.random.default_rng(seed)
    margins = np.empty(count)
    ok = np.empty(count, dtype=bool)
    dims = rng.choice(DIMENSIONS, size=count)
    p = rng.uniform(*P_RANGE, size=count)
    for d in DIMENSIONS:
        idx = np.flatnonzero(dims == d)
        if idx.size == 0:
            continue
        xi = rng.uniform(*ENTRY_RANGE, size=(idx.size, d))
        eta = rng.uniform(*ENTRY_RANGE, size=(idx.size, d))
        lhs, rhs, flags = monotonicity_gap_batch(xi, eta, p[idx])
        margins[idx] = (lhs - rhs) / (1.0 + np.abs(lhs))
        ok[idx] = flags
    return margins, ok


def fuzz_pointwise(samples: int, seed: int, workers: int = 1) -> FuzzSummary:
    """
    Sweep the pointwise monotonicity inequality.

    p uniform in [1, 10], d uniform in {1, 2, 3}, entries uniform in [-10, 10].
    Samples are processed in chunks of 100k, each with its own child stream.
    """
    if samples < 0:
        raise ValueError("samples must be >= 0")
    sizes = [POINTWISE_CHUNK] * (samples // POINTWISE_CHUNK)
    if samples % POINTWISE_CHUNK:
        sizes.append(samples % POINTWISE_CHUNK)
    streams = np.random.SeedSequence([seed, 0]).spawn(len(sizes))

    summary = FuzzSummary("monotonicity_gap")
    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        for margins, ok in pool.map(_pointwise_chunk, streams, sizes):
            summary.record(margins, ok)
    logger.info(
        f"pointwise sweep: {summary.samples} samples, {summary.violations} violations"
    )
    return summary


def random_field(rng: np.random.Generator, grid: Grid, modes: int = 4) -> ScalarField:
    """Smooth random field: a short random sine series plus an offset."""
    x = (grid.nodes - grid.a) / (grid.b - grid.a)
    coeffs = rng.normal(size=modes)
    freqs = rng.uniform(0.5, 4.0, size=modes)
    phases = rng.uniform(0.0, 2.0 * np.pi, size=modes)
    values = rng.normal() + np.sum(
        coeffs[:, None] * np.sin(2.0 * np.pi * freqs[:, None] * x[None, :] + phases[:, None]),
        axis=0,
    )
    return ScalarField(grid, values)


def random_exponent(rng: np.random.Generator, grid: Grid, low: float, high: float) -> ExponentField:
    """Smooth exponent with values in [low, high]."""
    raw = random_field(rng, grid, modes=2).values
    span = float(np.max(raw) - np.min(raw))
    t = (raw - np.min(raw)) / span if span > 0.0 else np.zeros_like(raw)
    lo, hi = np.sort(rng.uniform(low, high, size=2))
    return ExponentField(grid, lo + (hi - lo) * t)


def _random_grid(rng: np.random.Generator) -> Grid:
    a = float(rng.uniform(-1.0, 0.0))
    return Grid(a, a + float(rng.uniform(0.5, 2.0)), int(rng.integers(8, 41)))


def _holder_trial(rng: np.random.Generator) -> Tuple[float, bool]:
    grid = _random_grid(rng)
    q = random_exponent(rng, grid, 1.1, 5.0)
    check = holder_check(random_field(rng, grid), random_field(rng, grid), q)
    return (check.rhs - check.lhs) / (1.0 + abs(check.rhs)), check.ok


def _bracket_trial(rng: np.random.Generator) -> Tuple[float, bool]:
    grid = _random_grid(rng)
    q = random_exponent(rng, grid, 1.1, 6.0)
    # log-uniform scale so norms far below and above 1 are drawn
    f = random_field(rng, grid) * float(10.0 ** rng.uniform(-8.0, 2.0))
    return modular_norm_bracket_margin(f, q), modular_norm_bracket_check(f, q)


def _field_gap_trial(rng: np.random.Generator) -> Tuple[float, bool]:
    grid = _random_grid(rng)
    # alternate between the sub-quadratic and super-quadratic bound
    if rng.random() < 0.5:
        p = random_exponent(rng, grid, 1.2, 1.8)
    else:
        p = random_exponent(rng, grid, 2.0, 4.0)
    result = field_monotonicity_gap(random_field(rng, grid), random_field(rng, grid), p)
    bound = max(result.rhs_lest, result.rhs_rest)
    return (result.lhs - bound) / (1.0 + abs(result.lhs)) + FIELD_RTOL, result.consistent


FIELD_ORACLES: Dict[str, Callable[[np.random.Generator], Tuple[float, bool]]] = {
    "holder_check": _holder_trial,
    "modular_norm_bracket_check": _bracket_trial,
    "field_monotonicity_gap": _field_gap_trial,
}


def _run_field_oracle(name: str, seed: np.random.SeedSequence, trials: int) -> FuzzSummary:
    rng = np.random.default_rng(seed)
    summary = FuzzSummary(name)
    margins = np.empty(trials)
    ok = np.empty(trials, dtype=bool)
    for i in range(trials):
        margins[i], ok[i] = FIELD_ORACLES[name](rng)
    summary.record(margins, ok)
    logger.info(f"{name}: {trials} trials, {summary.violations} violations")
    return summary


def fuzz_fields(trials: int, seed: int, workers: int = 1) -> List[FuzzSummary]:
    """Random grid-level trials of the Hölder, bracket and field monotonicity oracles."""
    if trials < 0:
        raise ValueError("trials must be >= 0")
    names = list(FIELD_ORACLES)
    streams = np.random.SeedSequence([seed, 1]).spawn(len(names))
    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        return list(pool.map(_run_field_oracle, names, streams, [trials] * len(names)))
