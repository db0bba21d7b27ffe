"""
Executable monotonicity inequalities for the p-Laplace flux |v|^{p-2} v.

Pointwise, for all xi, eta in R^d:

    (i)   p >= 2:      (flux(xi) - flux(eta)) . (xi - eta) >= 2^{1-p} |xi - eta|^p
    (ii)  1 <= p < 2:  (flux(xi) - flux(eta)) . (xi - eta)
                           >= (p-1) (|xi|^p + |eta|^p)^{(p-2)/p} |xi - eta|^2

and the integrated form for variable exponents on a grid. None of these raise
on a failed inequality; they report both sides and a flag.
"""

import logging
import math
from dataclasses import dataclass
from typing import NamedTuple, Tuple

import numpy as np

from ddlab.grid import ExponentField, ScalarField, face_exponent, gradient, quadrature_weights
from ddlab.lebesgue import weighted_luxemburg

logger = logging.getLogger("ddlab.inequalities")
logger.setLevel(logging.DEBUG)

POINTWISE_RTOL = 1e-12
FIELD_RTOL = 1e-8


@dataclass(frozen=True, eq=False)
class VecPair:
    """Two vectors of one dimension d >= 1 and an exponent 1 <= p < inf."""

    xi: np.ndarray
    eta: np.ndarray
    p: float

    def __post_init__(self):
        xi = np.atleast_1d(np.asarray(self.xi, dtype=float)).reshape(-1)
        eta = np.atleast_1d(np.asarray(self.eta, dtype=float)).reshape(-1)
        if xi.size == 0 or xi.shape != eta.shape:
            raise ValueError(f"xi and eta need one common dimension, got {xi.size} and {eta.size}")
        if not (np.all(np.isfinite(xi)) and np.all(np.isfinite(eta))):
            raise ValueError("VecPair entries must be finite")
        if not (math.isfinite(self.p) and self.p >= 1.0):
            raise ValueError(f"VecPair needs 1 <= p < inf, got {self.p}")
        object.__setattr__(self, "xi", xi)
        object.__setattr__(self, "eta", eta)
        object.__setattr__(self, "p", float(self.p))

    @property
    def dimension(self) -> int:
        return int(self.xi.size)

    def swapped(self) -> "VecPair":
        return VecPair(self.eta, self.xi, self.p)


class GapResult(NamedTuple):
    lhs: float
    rhs: float
    ok: bool


class FieldGapResult(NamedTuple):
    """Integrated monotonicity gap and its two lower bounds (0 where inapplicable)."""

    lhs: float
    rhs_lest: float
    rhs_rest: float

    @property
    def consistent(self) -> bool:
        tol = FIELD_RTOL * (1.0 + abs(self.lhs))
        return self.lhs >= self.rhs_lest - tol and self.lhs >= self.rhs_rest - tol


def flux(v: np.ndarray, p: float) -> np.ndarray:
    """|v|^{p-2} v, extended by 0 at v = 0."""
    v = np.asarray(v, dtype=float)
    norm = float(np.linalg.norm(v))
    if norm == 0.0:
        return np.zeros_like(v)
    return norm ** (p - 2.0) * v


def _rhs_pointwise(
    norm_xi: np.ndarray, norm_eta: np.ndarray, diff: np.ndarray, p: np.ndarray
) -> np.ndarray:
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        upper = 2.0 ** (1.0 - p) * diff**p
        total = norm_xi**p + norm_eta**p
        lower = np.where(
            total > 0.0,
            (p - 1.0) * np.where(total > 0.0, total, 1.0) ** ((p - 2.0) / p) * diff**2,
            0.0,
        )
    return np.where(p >= 2.0, upper, lower)


def monotonicity_gap(pair: VecPair) -> GapResult:
    """
    Both sides of the pointwise monotonicity inequality for one pair.

    ok = lhs >= rhs - 1e-12 * (1 + |lhs|).
    """
    lhs = float(np.dot(flux(pair.xi, pair.p) - flux(pair.eta, pair.p), pair.xi - pair.eta))
    rhs = float(
        _rhs_pointwise(
            np.array([np.linalg.norm(pair.xi)]),
            np.array([np.linalg.norm(pair.eta)]),
            np.array([np.linalg.norm(pair.xi - pair.eta)]),
            np.array([pair.p]),
        )[0]
    )
    return GapResult(lhs, rhs, lhs >= rhs - POINTWISE_RTOL * (1.0 + abs(lhs)))


def monotonicity_gap_batch(
    xi: np.ndarray, eta: np.ndarray, p: np.ndarray
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Vectorized monotonicity_gap over N pairs.

    Args:
        xi: array of shape (N, d)
        eta: array of shape (N, d)
        p: array of shape (N,)

    Returns:
        (lhs, rhs, ok) arrays of shape (N,)
    """
    xi = np.asarray(xi, dtype=float)
    eta = np.asarray(eta, dtype=float)
    p = np.asarray(p, dtype=float).reshape(-1)
    if xi.ndim != 2 or xi.shape != eta.shape or xi.shape[0] != p.size:
        raise ValueError("Batch needs xi, eta of shape (N, d) and p of shape (N,)")

    norm_xi = np.linalg.norm(xi, axis=1)
    norm_eta = np.linalg.norm(eta, axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        scale_xi = np.where(norm_xi > 0.0, np.where(norm_xi > 0.0, norm_xi, 1.0) ** (p - 2.0), 0.0)
        scale_eta = np.where(norm_eta > 0.0, np.where(norm_eta > 0.0, norm_eta, 1.0) ** (p - 2.0), 0.0)
    delta = xi - eta
    lhs = np.einsum("ij,ij->i", scale_xi[:, None] * xi - scale_eta[:, None] * eta, delta)
    rhs = _rhs_pointwise(norm_xi, norm_eta, np.linalg.norm(delta, axis=1), p)
    ok = lhs >= rhs - POINTWISE_RTOL * (1.0 + np.abs(lhs))
    return lhs, rhs, ok


def _face_flux(g: np.ndarray, p: np.ndarray) -> np.ndarray:
    mag = np.abs(g)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(mag > 0.0, np.where(mag > 0.0, mag, 1.0) ** (p - 2.0) * g, 0.0)


def field_monotonicity_gap(u: ScalarField, v: ScalarField, p: ExponentField) -> FieldGapResult:
    """
    Integrated gap  lhs = integral (flux(Du) - flux(Dv)) (Du - Dv)  with its bounds.

    rhs_lest (only for p+ <= 2) is

        (p- - 1) * min_{lam in {2/p-, 2/p+}} X^lam,
        X = integral |Du - Dv|^p / (2 || (|Du|^p + |Dv|^p)^{(2-p)/2} ||_{2/(2-p)})

    and rhs_rest (only for p- >= 2) is 2^{1-p+} integral |Du - Dv|^p. Gradients
    and exponents are face-centered, so p-/p+ are the face extremes.

    Raises:
        ValueError: on mismatched grids, or when both gradients vanish
    """
    if u.grid != v.grid or u.grid != p.grid:
        raise ValueError("u, v and p must share one grid")
    du = gradient(u).values
    dv = gradient(v).values
    if not (np.any(du != 0.0) or np.any(dv != 0.0)):
        raise ValueError("Field monotonicity bound needs ||Du|| + ||Dv|| > 0")

    pf = face_exponent(p)
    q = pf.p
    weights = quadrature_weights(u.grid, pf.centering)
    diff = du - dv

    lhs = float(np.dot(weights, (_face_flux(du, q) - _face_flux(dv, q)) * diff))
    diff_modular = float(np.dot(weights, np.abs(diff) ** q))

    rhs_lest = 0.0
    if pf.p_plus <= 2.0:
        total = np.abs(du) ** q + np.abs(dv) ** q
        weight_fn = total ** ((2.0 - q) / 2.0)
        with np.errstate(divide="ignore"):
            holder_exp = np.where(q < 2.0, 2.0 / np.where(q < 2.0, 2.0 - q, 1.0), np.inf)
        weight_norm = weighted_luxemburg(weight_fn, holder_exp, weights).luxemburg_norm
        if weight_norm > 0.0 and diff_modular > 0.0:
            x = diff_modular / (2.0 * weight_norm)
            rhs_lest = (pf.p_minus - 1.0) * min(x ** (2.0 / pf.p_minus), x ** (2.0 / pf.p_plus))

    rhs_rest = 0.0
    if pf.p_minus >= 2.0:
        rhs_rest = 2.0 ** (1.0 - pf.p_plus) * diff_modular

    result = FieldGapResult(lhs, rhs_lest, rhs_rest)
    if not result.consistent:
        logger.debug(f"field monotonicity bound violated: {result}")
    return result
