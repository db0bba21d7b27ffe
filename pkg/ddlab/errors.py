"""
Exceptions raised across the lab.

Domain type constructors raise plain ValueError; these cover configuration
and the numerical failures a run can end in.
"""

from typing import Optional


class LabError(Exception):
    """Base exception for lab errors"""
    pass


class ConfigError(LabError, ValueError):
    """A run configuration could not be parsed or violates an invariant"""
    def __init__(self, field_path: str, message: str):
        self.field_path = field_path
        super().__init__(f"{field_path}: {message}" if field_path else message)


class ConvergenceError(LabError):
    """Picard iteration did not converge even after step halving"""
    def __init__(self, time: float, dt: float, iterations: int, residual: float):
        self.time = time
        self.dt = dt
        self.iterations = iterations
        self.residual = residual
        super().__init__(
            f"Picard iteration did not converge at t={time:.6g} (dt={dt:.3g}): "
            f"{iterations} iterations, last change {residual:.3e}"
        )


class BoundViolationError(LabError):
    """Discrete maximum principle violated beyond tolerance"""
    def __init__(self, time: float, node: int, value: float, bound: Optional[str] = None):
        self.time = time
        self.node = node
        self.value = value
        detail = f" ({bound})" if bound else ""
        super().__init__(
            f"Bound violation at t={time:.6g}, node {node}: value {value:.17g}{detail}"
        )


class OutputError(LabError):
    """An output file could not be written"""
    def __init__(self, path: str, reason: str):
        self.path = path
        super().__init__(f"Could not write {path}: {reason}")
