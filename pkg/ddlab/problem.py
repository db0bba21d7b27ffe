"""
Problem and solver settings for the regularized problem, plus the builders
that turn shape strings ("constant:2", "bump:0.5,0.2,1") into fields.
"""

import math
from dataclasses import asdict, dataclass, field, replace
from typing import Any, Dict, List, Optional, Union

import numpy as np

from ddlab.grid import ExponentField, Grid, ScalarField
from ddlab.transforms import CutoffParams, Regime

FACE_AVERAGES = ("secant", "arithmetic")
DEFAULT_STEPS = 200

Shape = Union[str, List[float]]


@dataclass(frozen=True, eq=False)
class ProblemSpec:
    """
    Regularized problem on one grid.

    u0 is nonnegative with exact zeros at both boundary nodes; K = max u0.
    """

    grid: Grid
    regime: Regime
    p: ExponentField
    u0: ScalarField
    T: float
    epsilon: float
    K: float = field(init=False)

    def __post_init__(self):
        if self.p.grid != self.grid or self.u0.grid != self.grid:
            raise ValueError("p and u0 must live on the problem grid")
        if not (math.isfinite(self.T) and self.T > 0.0):
            raise ValueError(f"T must be positive, got {self.T}")
        if np.any(self.u0.values < 0.0):
            raise ValueError("u0 must be nonnegative")
        if self.u0.values[0] != 0.0 or self.u0.values[-1] != 0.0:
            raise ValueError("u0 must vanish at both boundary nodes")
        object.__setattr__(self, "K", self.u0.max())
        # validates epsilon in (0, 1]
        CutoffParams(self.epsilon, self.K)

    @property
    def cutoff(self) -> CutoffParams:
        return CutoffParams(self.epsilon, self.K)

    @property
    def m(self) -> float:
        return self.regime.m

    def with_epsilon(self, epsilon: float) -> "ProblemSpec":
        """Same problem at another regularization level."""
        return replace(self, epsilon=epsilon)


@dataclass(frozen=True)
class SolverConfig:
    """
    Time stepping and Picard settings.

    dt None means T / 200. face_average picks how the cutoff coefficient is
    carried to the faces ("secant" or "arithmetic").
    """

    dt: Optional[float] = None
    picard_tol: float = 1e-9
    picard_max: int = 100
    delta_g: float = 1e-8
    face_average: str = "secant"
    max_halvings: int = 6
    snapshot_every: int = 1

    def __post_init__(self):
        if self.dt is not None and not (math.isfinite(self.dt) and self.dt > 0.0):
            raise ValueError(f"dt must be positive, got {self.dt}")
        if not self.picard_tol > 0.0:
            raise ValueError(f"picard_tol must be positive, got {self.picard_tol}")
        if int(self.picard_max) != self.picard_max or self.picard_max < 1:
            raise ValueError(f"picard_max must be an integer >= 1, got {self.picard_max}")
        if not self.delta_g >= 0.0:
            raise ValueError(f"delta_g must be >= 0, got {self.delta_g}")
        if self.face_average not in FACE_AVERAGES:
            raise ValueError(
                f"face_average must be one of {', '.join(FACE_AVERAGES)}, got '{self.face_average}'"
            )
        if int(self.max_halvings) != self.max_halvings or self.max_halvings < 0:
            raise ValueError(f"max_halvings must be an integer >= 0, got {self.max_halvings}")
        if int(self.snapshot_every) != self.snapshot_every or self.snapshot_every < 1:
            raise ValueError(f"snapshot_every must be an integer >= 1, got {self.snapshot_every}")

    def resolved_dt(self, T: float) -> float:
        return self.dt if self.dt is not None else T / DEFAULT_STEPS

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "SolverConfig":
        return cls(**data)


def _split_numbers(text: str, count: int, what: str) -> List[float]:
    parts = [part.strip() for part in text.split(",")]
    if len(parts) != count:
        raise ValueError(f"{what} needs {count} comma separated numbers, got '{text}'")
    try:
        return [float(part) for part in parts]
    except ValueError:
        raise ValueError(f"{what} has a non-numeric entry: '{text}'")


def build_exponent(shape: Shape, grid: Grid) -> ExponentField:
    """
    Exponent field from "constant:<v>", "linear:<left>,<right>" or a nodal list.

    Raises:
        ValueError: for malformed shapes and values violating p > 1
    """
    if isinstance(shape, (list, tuple)):
        return ExponentField(grid, [float(v) for v in shape])
    if not isinstance(shape, str):
        raise ValueError(f"p must be a shape string or a list, got {type(shape).__name__}")
    kind, _, args = shape.partition(":")
    kind = kind.strip()
    if kind == "constant":
        (value,) = _split_numbers(args, 1, "constant")
        return ExponentField.constant(grid, value)
    if kind == "linear":
        left, right = _split_numbers(args, 2, "linear")
        return ExponentField.linear(grid, left, right)
    raise ValueError(f"Unknown exponent shape '{shape}' (use constant:<v>, linear:<a>,<b> or a list)")


def bump_profile(x: np.ndarray, center: float, width: float, height: float) -> np.ndarray:
    """height * cos^4(pi (x - center) / width) on |x - center| < width / 2, else 0."""
    inside = np.abs(x - center) < 0.5 * width
    return np.where(inside, height * np.cos(np.pi * (x - center) / width) ** 4, 0.0)


def build_initial(shape: Shape, grid: Grid, m: float) -> ScalarField:
    """
    Initial datum from "zero", "bump:<center>,<width>,<height>",
    "barenblatt:<t0>" or a nodal list. Named shapes get zero boundary nodes;
    a nodal list is used as given and must already vanish at both ends.

    Raises:
        ValueError: for malformed shapes, negative values, or a Barenblatt
            profile requested outside 0 < m < 1
    """
    if isinstance(shape, (list, tuple)):
        values = np.array([float(v) for v in shape])
        if values.size != grid.n:
            raise ValueError(f"u0 list needs {grid.n} values, got {values.size}")
        if values[0] != 0.0 or values[-1] != 0.0:
            raise ValueError("u0 list must vanish at both boundary nodes")
        return ScalarField(grid, values)
    if not isinstance(shape, str):
        raise ValueError(f"u0 must be a shape string or a list, got {type(shape).__name__}")

    kind, _, args = shape.partition(":")
    kind = kind.strip()
    x = grid.nodes
    if kind == "zero":
        values = np.zeros(grid.n)
    elif kind == "bump":
        center, width, height = _split_numbers(args, 3, "bump")
        if width <= 0.0 or height < 0.0:
            raise ValueError(f"bump needs width > 0 and height >= 0, got '{shape}'")
        values = bump_profile(x, center, width, height)
    elif kind == "barenblatt":
        from ddlab.verification import BarenblattParams, barenblatt_value

        (t0,) = _split_numbers(args, 1, "barenblatt")
        values = np.asarray(barenblatt_value(x, 0.0, BarenblattParams(m=m, t0=t0)))
    else:
        raise ValueError(
            f"Unknown u0 shape '{shape}' (use zero, bump:<c>,<w>,<h>, barenblatt:<t0> or a list)"
        )
    values = np.array(values, dtype=float)
    values[0] = 0.0
    values[-1] = 0.0
    return ScalarField(grid, values)
