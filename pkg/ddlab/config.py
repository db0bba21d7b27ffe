"""
Run configuration: parsing, validation and the config echo of report.json.

A config is one JSON document (any YAML mapping is accepted too). Keys may
be given flat ({"mode", "m", "p", "u0", "grid", "T", "epsilon", ...}) or
nested under "problem", "solver" and "verification"; to_dict always emits
the nested layout.
"""

import math
from contextlib import contextmanager
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Any, Dict, Iterator, List, Optional, Union

import yaml

from ddlab.continuation import geometric_schedule, validate_schedule
from ddlab.errors import ConfigError
from ddlab.grid import Grid
from ddlab.problem import ProblemSpec, SolverConfig, build_exponent, build_initial
from ddlab.transforms import Regime
from ddlab.utils import expand_path

MODES = ("solve", "continuation", "verify-lemmas", "barenblatt", "support-check")
SECTIONS = ("problem", "solver", "verification")

Shape = Union[str, List[float]]


@dataclass
class ProblemConfig:
    """Problem fields plus the eps schedule of a continuation run."""

    m: float
    grid: Grid
    T: float
    p: Shape = "constant:2"
    u0: Shape = "zero"
    epsilon: Optional[float] = None
    schedule: Optional[List[float]] = None
    epsilon0: float = 0.1
    levels: int = 4
    workers: int = 1

    def resolved_schedule(self) -> List[float]:
        if self.schedule is not None:
            return list(self.schedule)
        return geometric_schedule(self.epsilon0, self.levels)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "m": self.m,
            "grid": self.grid.to_dict(),
            "T": self.T,
            "p": self.p,
            "u0": self.u0,
            "epsilon": self.epsilon,
            "schedule": self.schedule,
            "epsilon0": self.epsilon0,
            "levels": self.levels,
            "workers": self.workers,
        }


@dataclass
class VerificationConfig:
    """Support check thresholds and fuzzing settings."""

    delta_s: float = 0.01
    dilation_cells: int = 1
    seed: int = 0
    samples: int = 1_000_000
    trials: int = 10_000

    def to_dict(self) -> Dict[str, Any]:
        return {f.name: getattr(self, f.name) for f in fields(self)}


@dataclass
class RunConfig:
    """A validated run configuration."""

    mode: str
    problem: Optional[ProblemConfig] = None
    solver: SolverConfig = field(default_factory=SolverConfig)
    verification: VerificationConfig = field(default_factory=VerificationConfig)

    def to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {
            "mode": self.mode,
            "solver": self.solver.to_dict(),
            "verification": self.verification.to_dict(),
        }
        if self.problem is not None:
            data["problem"] = self.problem.to_dict()
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "RunConfig":
        return parse_mapping(data)

    def build_problem(self, epsilon: Optional[float] = None) -> ProblemSpec:
        """
        ProblemSpec at the given eps (default: problem.epsilon).

        Raises:
            ConfigError: if there is no problem section or no eps to use
        """
        if self.problem is None:
            raise ConfigError("problem", "this mode needs a problem section")
        pc = self.problem
        eps = pc.epsilon if epsilon is None else epsilon
        if eps is None:
            raise ConfigError("problem.epsilon", "required for this mode")
        with _field("problem"):
            return ProblemSpec(
                grid=pc.grid,
                regime=Regime(pc.m),
                p=build_exponent(pc.p, pc.grid),
                u0=build_initial(pc.u0, pc.grid, pc.m),
                T=pc.T,
                epsilon=eps,
            )


@contextmanager
def _field(path: str) -> Iterator[None]:
    """Re-raise ValueError from the block as a ConfigError for one field path."""
    try:
        yield
    except ConfigError:
        raise
    except ValueError as e:
        raise ConfigError(path, str(e)) from e


def _number(value: Any, path: str) -> float:
    # YAML reads exponent-only floats such as 1e-05 as strings
    if isinstance(value, bool):
        raise ConfigError(path, f"expected a number, got {value!r}")
    try:
        number = float(value)
    except (TypeError, ValueError):
        raise ConfigError(path, f"expected a number, got {value!r}")
    if not math.isfinite(number):
        raise ConfigError(path, f"expected a finite number, got {value!r}")
    return number


def _integer(value: Any, path: str) -> int:
    number = _number(value, path)
    if number != int(number):
        raise ConfigError(path, f"expected an integer, got {value!r}")
    return int(number)


def _numbers(value: Any, path: str) -> List[float]:
    if not isinstance(value, (list, tuple)):
        raise ConfigError(path, f"expected a list of numbers, got {value!r}")
    return [_number(v, f"{path}[{i}]") for i, v in enumerate(value)]


def _shape(value: Any, path: str) -> Shape:
    if isinstance(value, str):
        return value.strip()
    return _numbers(value, path)


def _grid(value: Any, path: str) -> Grid:
    if isinstance(value, dict):
        _reject_unknown(value, {"a", "b", "n"}, path)
        parts = [value.get("a"), value.get("b"), value.get("n")]
    elif isinstance(value, str):
        parts = [part.strip() for part in value.split(",")]
    elif isinstance(value, (list, tuple)):
        parts = list(value)
    else:
        raise ConfigError(path, f"expected 'a,b,n', a list or a mapping, got {value!r}")
    if len(parts) != 3 or any(p is None or p == "" for p in parts):
        raise ConfigError(path, f"grid needs a, b and n, got {value!r}")
    a = _number(parts[0], f"{path}.a")
    b = _number(parts[1], f"{path}.b")
    n = _integer(parts[2], f"{path}.n")
    with _field(path):
        return Grid(a, b, n)


def _reject_unknown(data: Dict[str, Any], allowed: set, path: str):
    for key in data:
        if key not in allowed:
            where = f"{path}.{key}" if path else str(key)
            raise ConfigError(where, "unknown key")


PROBLEM_KEYS = {f.name for f in fields(ProblemConfig)}
SOLVER_KEYS = {f.name for f in fields(SolverConfig)}
VERIFICATION_KEYS = {f.name for f in fields(VerificationConfig)}


def _parse_problem(data: Dict[str, Any], mode: str) -> ProblemConfig:
    path = "problem"
    _reject_unknown(data, PROBLEM_KEYS, path)
    for key in ("m", "grid", "T"):
        if key not in data:
            raise ConfigError(f"{path}.{key}", "required")

    m = _number(data["m"], f"{path}.m")
    with _field(f"{path}.m"):
        Regime(m)
    grid = _grid(data["grid"], f"{path}.grid")
    T = _number(data["T"], f"{path}.T")
    if not T > 0.0:
        raise ConfigError(f"{path}.T", f"must be positive, got {T}")

    p = _shape(data.get("p", "constant:2"), f"{path}.p")
    with _field(f"{path}.p"):
        build_exponent(p, grid)
    u0 = _shape(data.get("u0", "zero"), f"{path}.u0")
    with _field(f"{path}.u0"):
        initial = build_initial(u0, grid, m)

    epsilon = None
    if data.get("epsilon") is not None:
        epsilon = _number(data["epsilon"], f"{path}.epsilon")
        if not 0.0 < epsilon <= 1.0:
            raise ConfigError(f"{path}.epsilon", f"must lie in (0, 1], got {epsilon}")
    elif mode in ("solve", "support-check"):
        raise ConfigError(f"{path}.epsilon", f"required for mode '{mode}'")

    schedule = None
    if data.get("schedule") is not None:
        schedule = _numbers(data["schedule"], f"{path}.schedule")
    epsilon0 = _number(data.get("epsilon0", 0.1), f"{path}.epsilon0")
    levels = _integer(data.get("levels", 4), f"{path}.levels")
    workers = _integer(data.get("workers", 1), f"{path}.workers")
    if workers < 1:
        raise ConfigError(f"{path}.workers", f"must be >= 1, got {workers}")
    with _field(f"{path}.schedule" if schedule is not None else f"{path}.epsilon0"):
        validate_schedule(schedule if schedule is not None else geometric_schedule(epsilon0, levels))
    with _field(f"{path}.u0"):
        # nonnegative with zero boundary nodes; eps only matters for its own range
        ProblemSpec(grid, Regime(m), build_exponent(p, grid), initial, T, epsilon or 1.0)

    return ProblemConfig(
        m=m,
        grid=grid,
        T=T,
        p=p,
        u0=u0,
        epsilon=epsilon,
        schedule=schedule,
        epsilon0=epsilon0,
        levels=levels,
        workers=workers,
    )


def _parse_solver(data: Dict[str, Any]) -> SolverConfig:
    path = "solver"
    _reject_unknown(data, SOLVER_KEYS, path)
    values: Dict[str, Any] = {}
    for key in ("dt", "picard_tol", "delta_g"):
        if data.get(key) is not None:
            values[key] = _number(data[key], f"{path}.{key}")
    for key in ("picard_max", "max_halvings", "snapshot_every"):
        if data.get(key) is not None:
            values[key] = _integer(data[key], f"{path}.{key}")
    if data.get("face_average") is not None:
        values["face_average"] = str(data["face_average"])
    for key in values:
        with _field(f"{path}.{key}"):
            SolverConfig(**{key: values[key]})
    return SolverConfig(**values)


def _parse_verification(data: Dict[str, Any]) -> VerificationConfig:
    path = "verification"
    _reject_unknown(data, VERIFICATION_KEYS, path)
    config = VerificationConfig()
    if data.get("delta_s") is not None:
        config.delta_s = _number(data["delta_s"], f"{path}.delta_s")
        if not config.delta_s > 0.0:
            raise ConfigError(f"{path}.delta_s", f"must be positive, got {config.delta_s}")
    for key in ("dilation_cells", "seed", "samples", "trials"):
        if data.get(key) is not None:
            value = _integer(data[key], f"{path}.{key}")
            if value < 0:
                raise ConfigError(f"{path}.{key}", f"must be >= 0, got {value}")
            setattr(config, key, value)
    return config


def _split_flat(data: Dict[str, Any]) -> Dict[str, Dict[str, Any]]:
    sections: Dict[str, Dict[str, Any]] = {name: {} for name in SECTIONS}
    for key, value in data.items():
        if key == "mode":
            continue
        if key in PROBLEM_KEYS:
            sections["problem"][key] = value
        elif key in SOLVER_KEYS:
            sections["solver"][key] = value
        elif key in VERIFICATION_KEYS:
            sections["verification"][key] = value
        else:
            raise ConfigError(str(key), "unknown key")
    return sections


def parse_mapping(data: Any) -> RunConfig:
    """Validate an already loaded config mapping."""
    if not isinstance(data, dict):
        raise ConfigError("", "config must be a mapping")
    if "mode" not in data:
        raise ConfigError("mode", "required")
    mode = data["mode"]
    if mode not in MODES:
        raise ConfigError("mode", f"must be one of {', '.join(MODES)}, got {mode!r}")

    if any(name in data for name in SECTIONS):
        _reject_unknown(data, set(SECTIONS) | {"mode"}, "")
        sections = {name: data.get(name) for name in SECTIONS}
        for name, section in sections.items():
            if section is not None and not isinstance(section, dict):
                raise ConfigError(name, "must be a mapping")
    else:
        sections = _split_flat(data)

    problem_data = sections.get("problem") or None
    if problem_data is None and mode in ("solve", "continuation", "support-check"):
        raise ConfigError("problem", f"required for mode '{mode}'")

    config = RunConfig(
        mode=mode,
        problem=_parse_problem(problem_data, mode) if problem_data else None,
        solver=_parse_solver(sections.get("solver") or {}),
        verification=_parse_verification(sections.get("verification") or {}),
    )
    if config.problem is not None and config.solver.delta_g == 0.0:
        p_minus = build_exponent(config.problem.p, config.problem.grid).p_minus
        if p_minus < 2.0:
            raise ConfigError(
                "solver.delta_g",
                f"must be positive when p- = {p_minus} < 2 (flat regions have no flux)",
            )
    return config


def parse_config(text: str) -> RunConfig:
    """
    Parse and validate a config document.

    Raises:
        ConfigError: for syntax errors, unknown keys and invariant violations
    """
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as e:
        raise ConfigError("", f"invalid config document: {e}") from e
    return parse_mapping(data)


def load_config(path: Union[str, Path]) -> RunConfig:
    """Read a config file and parse it."""
    config_file = expand_path(str(path))
    try:
        text = config_file.read_text()
    except OSError as e:
        raise ConfigError("", f"cannot read {config_file}: {e}") from e
    return parse_config(text)
