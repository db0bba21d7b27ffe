"""
Uniform 1D grid, grid functions and the discrete calculus shared by every module.

Nodal fields live on x_i = a + i*h (n values). Face fields live on the cell
midpoints (n-1 values) and are what `gradient` produces. `divergence` is the
adjoint of `gradient`, so for any face field g and any nodal phi vanishing at
both boundary nodes

    sum_faces h * g_i * (phi_{i+1} - phi_i) / h == -sum_nodes h * div(g)_i * phi_i

up to roundoff. The discrete energy estimates of the solver rest on this.
"""

import math
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, Union

import numpy as np

NODE = "node"
FACE = "face"
CENTERINGS = (NODE, FACE)

Number = Union[int, float]


def _frozen_array(values: Any) -> np.ndarray:
    arr = np.array(values, dtype=float, copy=True).reshape(-1)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class Grid:
    """Uniform grid on [a, b] with n nodes."""

    a: float
    b: float
    n: int

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 3:
            raise ValueError(f"Grid needs n >= 3 nodes, got {self.n}")
        if not (math.isfinite(self.a) and math.isfinite(self.b)):
            raise ValueError(f"Grid endpoints must be finite, got [{self.a}, {self.b}]")
        if not self.b > self.a:
            raise ValueError(f"Grid needs b > a, got [{self.a}, {self.b}]")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "a", float(self.a))
        object.__setattr__(self, "b", float(self.b))

    @property
    def h(self) -> float:
        """Node spacing (b - a) / (n - 1)."""
        return (self.b - self.a) / (self.n - 1)

    @property
    def nodes(self) -> np.ndarray:
        """Node coordinates x_i = a + i*h."""
        return self.a + np.arange(self.n) * self.h

    @property
    def faces(self) -> np.ndarray:
        """Face (cell midpoint) coordinates."""
        return self.a + (np.arange(self.n - 1) + 0.5) * self.h

    def size(self, centering: str = NODE) -> int:
        """Number of values a field with this centering carries."""
        return self.n if centering == NODE else self.n - 1

    def coordinates(self, centering: str = NODE) -> np.ndarray:
        return self.nodes if centering == NODE else self.faces

    def refine(self) -> "Grid":
        """Same interval with the spacing halved."""
        return Grid(self.a, self.b, 2 * self.n - 1)

    def to_dict(self) -> Dict[str, Any]:
        return {"a": self.a, "b": self.b, "n": self.n}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "Grid":
        return cls(a=float(data["a"]), b=float(data["b"]), n=int(data["n"]))


def quadrature_weights(grid: Grid, centering: str = NODE) -> np.ndarray:
    """
    Weights w with integrate(f) == sum(w * f).

    Trapezoid for nodal fields, midpoint for face fields.
    """
    if centering == FACE:
        return np.full(grid.n - 1, grid.h)
    weights = np.full(grid.n, grid.h)
    weights[0] *= 0.5
    weights[-1] *= 0.5
    return weights


@dataclass(frozen=True, eq=False)
class ScalarField:
    """Values of a function on the nodes (or faces) of a grid."""

    grid: Grid
    values: np.ndarray
    centering: str = NODE

    def __post_init__(self):
        if self.centering not in CENTERINGS:
            raise ValueError(f"Unknown centering '{self.centering}'")
        values = _frozen_array(self.values)
        expected = self.grid.size(self.centering)
        if values.size != expected:
            raise ValueError(
                f"{self.centering} field on {self.grid.n} nodes needs {expected} values, "
                f"got {values.size}"
            )
        if not np.all(np.isfinite(values)):
            raise ValueError("Field values must be finite")
        object.__setattr__(self, "values", values)

    @classmethod
    def from_function(
        cls, grid: Grid, fn: Callable[[np.ndarray], Any], centering: str = NODE
    ) -> "ScalarField":
        """Sample fn at the node (or face) coordinates."""
        x = grid.coordinates(centering)
        return cls(grid, np.broadcast_to(np.asarray(fn(x), dtype=float), x.shape), centering)

    @classmethod
    def constant(cls, grid: Grid, value: Number, centering: str = NODE) -> "ScalarField":
        return cls(grid, np.full(grid.size(centering), float(value)), centering)

    @property
    def x(self) -> np.ndarray:
        return self.grid.coordinates(self.centering)

    def with_values(self, values: Any) -> "ScalarField":
        """New field on the same grid and centering."""
        return ScalarField(self.grid, values, self.centering)

    def map(self, fn: Callable[[np.ndarray], Any]) -> "ScalarField":
        return self.with_values(fn(self.values))

    def abs(self) -> "ScalarField":
        return self.with_values(np.abs(self.values))

    def max(self) -> float:
        return float(np.max(self.values))

    def min(self) -> float:
        return float(np.min(self.values))

    def _check_compatible(self, other: "ScalarField"):
        if other.grid != self.grid or other.centering != self.centering:
            raise ValueError("Fields live on different grids or centerings")

    def __add__(self, other: Union["ScalarField", Number]) -> "ScalarField":
        if isinstance(other, ScalarField):
            self._check_compatible(other)
            return self.with_values(self.values + other.values)
        return self.with_values(self.values + float(other))

    def __sub__(self, other: Union["ScalarField", Number]) -> "ScalarField":
        if isinstance(other, ScalarField):
            self._check_compatible(other)
            return self.with_values(self.values - other.values)
        return self.with_values(self.values - float(other))

    def __mul__(self, other: Union["ScalarField", Number]) -> "ScalarField":
        if isinstance(other, ScalarField):
            self._check_compatible(other)
            return self.with_values(self.values * other.values)
        return self.with_values(self.values * float(other))

    __rmul__ = __mul__

    def __neg__(self) -> "ScalarField":
        return self.with_values(-self.values)

    def __len__(self) -> int:
        return int(self.values.size)


@dataclass(frozen=True, eq=False)
class ExponentField:
    """
    Variable exponent p(x) sampled on a grid.

    p_minus / p_plus are the extreme sampled values and log_holder_modulus the
    discrete estimate from `log_holder_estimate`; all three are derived.
    """

    grid: Grid
    p: np.ndarray
    centering: str = NODE
    p_minus: float = field(init=False)
    p_plus: float = field(init=False)
    log_holder_modulus: float = field(init=False)

    def __post_init__(self):
        if self.centering not in CENTERINGS:
            raise ValueError(f"Unknown centering '{self.centering}'")
        p = _frozen_array(self.p)
        expected = self.grid.size(self.centering)
        if p.size != expected:
            raise ValueError(f"Exponent needs {expected} values, got {p.size}")
        if not np.all(np.isfinite(p)):
            raise ValueError("Exponent values must be finite (p+ < inf)")
        if np.any(p <= 1.0):
            raise ValueError(f"Exponent must satisfy 1 < p(x), got min {float(np.min(p))}")
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "p_minus", float(np.min(p)))
        object.__setattr__(self, "p_plus", float(np.max(p)))
        object.__setattr__(
            self, "log_holder_modulus", _log_holder(self.grid.coordinates(self.centering), p)
        )

    @classmethod
    def constant(cls, grid: Grid, value: Number, centering: str = NODE) -> "ExponentField":
        return cls(grid, np.full(grid.size(centering), float(value)), centering)

    @classmethod
    def linear(cls, grid: Grid, left: Number, right: Number) -> "ExponentField":
        """p(a) = left, p(b) = right, linear in between."""
        t = (grid.nodes - grid.a) / (grid.b - grid.a)
        return cls(grid, float(left) + (float(right) - float(left)) * t)

    @property
    def is_constant(self) -> bool:
        return self.p_plus == self.p_minus

    def as_field(self) -> ScalarField:
        return ScalarField(self.grid, self.p, self.centering)


def _log_holder(x: np.ndarray, p: np.ndarray) -> float:
    # pairs at distance k*h for every k with k*h <= 1/2
    best = 0.0
    for k in range(1, x.size):
        dist = float(x[k] - x[0])
        if dist > 0.5 + 1e-12:
            break
        osc = float(np.max(np.abs(p[k:] - p[:-k])))
        best = max(best, osc * math.log(1.0 / dist))
    return best


def gradient(f: ScalarField) -> ScalarField:
    """Face-centered difference quotients g_i = (f_{i+1} - f_i) / h."""
    if f.centering != NODE:
        raise ValueError("gradient takes a nodal field")
    return ScalarField(f.grid, np.diff(f.values) / f.grid.h, FACE)


def divergence(g: ScalarField) -> ScalarField:
    """
    Adjoint stencil of `gradient`: (g_i - g_{i-1}) / h at interior nodes.

    Boundary entries are zero; they never enter the Dirichlet problems.
    """
    if g.centering != FACE:
        raise ValueError("divergence takes a face field")
    out = np.zeros(g.grid.n)
    out[1:-1] = np.diff(g.values) / g.grid.h
    return ScalarField(g.grid, out, NODE)


def integrate(f: ScalarField) -> float:
    """Trapezoid rule for nodal fields, midpoint rule for face fields."""
    return float(np.dot(quadrature_weights(f.grid, f.centering), f.values))


def face_exponent(p: ExponentField) -> ExponentField:
    """Face exponent: arithmetic mean of the two adjacent nodal values."""
    if p.centering == FACE:
        return p
    return ExponentField(p.grid, 0.5 * (p.p[:-1] + p.p[1:]), FACE)


def log_holder_estimate(p: ExponentField) -> float:
    """
    max |p(x_i) - p(x_j)| * log(1 / |x_i - x_j|) over pairs with |x_i - x_j| <= 1/2.

    Diagnostic surrogate for log-Hölder continuity; nothing is gated on it.
    """
    return _log_holder(p.grid.coordinates(p.centering), p.p)
