"""
Discrete variable exponent Lebesgue spaces.

Modular, Luxemburg norm, conjugate exponent, the V-space norm and the two
inequality reporters (generalized Hölder, modular/norm bracket). Every
integral uses the quadrature of `ddlab.grid`, so all inequalities are exact
statements about a weighted finite measure and hold to roundoff.
"""

import logging
import math
from dataclasses import asdict, dataclass
from typing import Any, Dict, NamedTuple, Tuple

import numpy as np

from ddlab.grid import (
    ExponentField,
    ScalarField,
    face_exponent,
    gradient,
    integrate,
    quadrature_weights,
)

logger = logging.getLogger("ddlab.lebesgue")
logger.setLevel(logging.DEBUG)

NORM_RTOL = 1e-10
HOLDER_SLACK = 1e-8
BRACKET_SLACK = 1e-8
CONJUGATE_FLOOR = 1.0 + 1e-12

_MAX_BRACKET_STEPS = 2100
_MAX_BISECTIONS = 400
# relative bracket width at which bisection stops
_BISECTION_RTOL = 1e-2 * NORM_RTOL


@dataclass(frozen=True)
class NormReport:
    """Outcome of a Luxemburg norm evaluation."""

    modular_value: float
    luxemburg_norm: float
    bisection_iterations: int
    bracket_low: float
    bracket_high: float

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


class InequalityCheck(NamedTuple):
    """Both sides of a checked inequality and whether it held."""

    lhs: float
    rhs: float
    ok: bool


def _require_shared(f: ScalarField, q: ExponentField):
    if f.grid != q.grid or f.centering != q.centering:
        raise ValueError("Field and exponent must share one grid and centering")


def weighted_modular(values: np.ndarray, exponents: np.ndarray, weights: np.ndarray) -> float:
    """
    sum_i w_i |f_i|^{q_i}.

    Infinite exponents follow the L-infinity convention: |f|^inf is 0 below 1,
    1 at 1 and inf above.
    """
    with np.errstate(over="ignore"):
        terms = np.abs(values) ** exponents
    return float(np.dot(weights, terms))


def weighted_luxemburg(
    values: np.ndarray, exponents: np.ndarray, weights: np.ndarray
) -> NormReport:
    """
    inf{alpha > 0 : modular(f / alpha) <= 1} by bracketing and bisection.

    The search runs on f / max|f| and is scaled back, with a relative stopping
    width, so the accuracy does not depend on the size of f. The returned
    norm is the upper end of the bracket, which always satisfies the
    constraint.
    """
    values = np.asarray(values, dtype=float)
    modular_value = weighted_modular(values, exponents, weights)
    scale = float(np.max(np.abs(values))) if values.size else 0.0
    if scale == 0.0:
        return NormReport(modular_value, 0.0, 0, 0.0, 0.0)
    unit = values / scale

    def rho(alpha: float) -> float:
        return weighted_modular(unit / alpha, exponents, weights)

    high = 1.0
    steps = 0
    while rho(high) > 1.0:
        high *= 2.0
        steps += 1
        if steps > _MAX_BRACKET_STEPS:
            raise ValueError("Could not bracket the Luxemburg norm from above")
    low = high
    while rho(low) <= 1.0:
        low *= 0.5
        steps += 1
        if steps > _MAX_BRACKET_STEPS or low == 0.0:
            raise ValueError("Could not bracket the Luxemburg norm from below")

    iterations = 0
    while high - low >= _BISECTION_RTOL * high and iterations < _MAX_BISECTIONS:
        mid = 0.5 * (low + high)
        if rho(mid) <= 1.0:
            high = mid
        else:
            low = mid
        iterations += 1

    return NormReport(modular_value, scale * high, iterations, scale * low, scale * high)


def modular(f: ScalarField, q: ExponentField) -> float:
    """Quadrature value of the modular: integral of |f(x)|^{q(x)}."""
    _require_shared(f, q)
    return weighted_modular(f.values, q.p, quadrature_weights(f.grid, f.centering))


def luxemburg_norm(f: ScalarField, q: ExponentField) -> NormReport:
    """Luxemburg norm of f in L^{q(.)}; zero for the zero function."""
    _require_shared(f, q)
    return weighted_luxemburg(f.values, q.p, quadrature_weights(f.grid, f.centering))


def conjugate(q: ExponentField) -> ExponentField:
    """
    Nodewise conjugate exponent q / (q - 1).

    Raises:
        ValueError: if any value is within 1e-12 of 1
    """
    if np.any(q.p <= CONJUGATE_FLOOR):
        raise ValueError(
            f"Conjugate exponent blows up: min q = {q.p_minus} is not above 1 + 1e-12"
        )
    return ExponentField(q.grid, q.p / (q.p - 1.0), q.centering)


def l2_norm(f: ScalarField) -> float:
    """Classical L^2 norm."""
    return math.sqrt(max(integrate(f * f), 0.0))


def v_norm(u: ScalarField, p: ExponentField) -> float:
    """
    Norm of the space V: ||u||_2 + ||Du||_{p(.)}.

    The gradient lives on faces, so p is sampled there by averaging.
    """
    _require_shared(u, p)
    grad_norm = luxemburg_norm(gradient(u), face_exponent(p)).luxemburg_norm
    return l2_norm(u) + grad_norm


def sobolev_norm(u: ScalarField, q: ExponentField) -> float:
    """W^{1,q(.)} norm: ||u||_{q(.)} + ||Du||_{q(.)}."""
    _require_shared(u, q)
    value_norm = luxemburg_norm(u, q).luxemburg_norm
    grad_norm = luxemburg_norm(gradient(u), face_exponent(q)).luxemburg_norm
    return value_norm + grad_norm


def holder_check(f: ScalarField, g: ScalarField, q: ExponentField) -> InequalityCheck:
    """
    Generalized Hölder inequality: integral |fg| <= 2 ||f||_{q(.)} ||g||_{q'(.)}.
    """
    _require_shared(f, q)
    _require_shared(g, q)
    lhs = integrate((f * g).abs())
    rhs = 2.0 * luxemburg_norm(f, q).luxemburg_norm * luxemburg_norm(g, conjugate(q)).luxemburg_norm
    return InequalityCheck(lhs, rhs, lhs <= rhs * (1.0 + HOLDER_SLACK))


def norm_bracket(norm: float, q_minus: float, q_plus: float) -> Tuple[float, float]:
    """(min, max) of {norm^{q-}, norm^{q+}}."""
    a = norm**q_minus
    b = norm**q_plus
    return min(a, b), max(a, b)


def modular_norm_bracket_margin(f: ScalarField, q: ExponentField) -> float:
    """
    Relative room in min{||f||^{q-}, ||f||^{q+}} <= modular(f) <= max{...}:
    min(rho / low - 1, 1 - rho / high), negative when the bracket fails.

    Raises:
        ValueError: for f == 0, where the bracket is not defined
    """
    report = luxemburg_norm(f, q)
    if report.luxemburg_norm <= 0.0:
        raise ValueError("Modular/norm bracket needs ||f|| > 0")
    low, high = norm_bracket(report.luxemburg_norm, q.p_minus, q.p_plus)
    rho = report.modular_value
    return min(rho / low - 1.0, 1.0 - rho / high)


def modular_norm_bracket_check(f: ScalarField, q: ExponentField) -> bool:
    """
    min{||f||^{q-}, ||f||^{q+}} <= modular(f) <= max{||f||^{q-}, ||f||^{q+}},
    up to a relative slack of 1e-8.

    Raises:
        ValueError: for f == 0, where the bracket is not defined
    """
    margin = modular_norm_bracket_margin(f, q)
    ok = margin >= -BRACKET_SLACK
    if not ok:
        logger.debug(f"bracket violated by {-margin:.3e} (relative)")
    return ok
