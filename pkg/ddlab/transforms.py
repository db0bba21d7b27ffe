"""
Substitutions between u and v for the three m-regimes.

    0 < m < 1   v = Phi(u) = u^{1-m} / (1-m)    u = Psi(v) = ((1-m) v)^{1/(1-m)}
    m = 1       v = Phi(u) = ln u               u = Psi(v) = e^v
    m > 1       v = Phi(u) = u^{1-m} / (m-1)    u = Psi(v) = ((m-1) v)^{1/(1-m)}

In every regime |Psi'(v)| = Psi(v)^m = u^m, which is how the non-divergence
equation u_t = u^m div(|Du|^{p-2} Du) becomes the divergence form equation
v_t = div(|Psi'(v)|^{p-1} |Dv|^{p-2} Dv) the solver integrates.

All functions take floats or numpy arrays; scalar in, float out.
"""

import math
from dataclasses import dataclass, field
from typing import Any, Union

import numpy as np

SUB = "sub"
LOG = "log"
SUPER = "super"

ArrayLike = Union[float, np.ndarray]


def _out(value: np.ndarray, like: Any) -> ArrayLike:
    if np.ndim(like) == 0:
        return float(value)
    return value


@dataclass(frozen=True)
class Regime:
    """Nonlinearity exponent m and its substitution regime."""

    m: float
    kind: str = field(init=False)

    def __post_init__(self):
        if not math.isfinite(self.m) or self.m <= 0.0:
            raise ValueError(f"m must be a finite positive number, got {self.m}")
        if self.m < 1.0:
            kind = SUB
        elif self.m == 1.0:
            kind = LOG
        else:
            kind = SUPER
        object.__setattr__(self, "kind", kind)

    @property
    def increasing(self) -> bool:
        """Phi is increasing for m <= 1 and decreasing for m > 1."""
        return self.kind != SUPER


@dataclass(frozen=True)
class CutoffParams:
    """Regularization level epsilon and K = ess sup u0."""

    epsilon: float
    K: float

    def __post_init__(self):
        if not (0.0 < self.epsilon <= 1.0):
            raise ValueError(f"epsilon must lie in (0, 1], got {self.epsilon}")
        if not (math.isfinite(self.K) and self.K >= 0.0):
            raise ValueError(f"K must be finite and >= 0, got {self.K}")

    def band(self, regime: Regime) -> tuple:
        """Closed band [eps^m, (K + eps)^m] the cutoff coefficient lives in."""
        return self.epsilon**regime.m, (self.K + self.epsilon) ** regime.m


def phi(u: ArrayLike, r: Regime) -> ArrayLike:
    """
    Phi(u) for the regime of r.

    Raises:
        ValueError: if any u <= 0 (the transform is singular at zero)
    """
    arr = np.asarray(u, dtype=float)
    if np.any(arr <= 0.0):
        raise ValueError("phi needs u > 0")
    if r.kind == LOG:
        out = np.log(arr)
    elif r.kind == SUB:
        out = arr ** (1.0 - r.m) / (1.0 - r.m)
    else:
        out = arr ** (1.0 - r.m) / (r.m - 1.0)
    return _out(out, u)


def in_domain(v: ArrayLike, r: Regime) -> np.ndarray:
    """Mask of the v values Psi is defined at."""
    arr = np.asarray(v, dtype=float)
    if r.kind == LOG:
        return np.isfinite(arr)
    return arr > 0.0


def psi(v: ArrayLike, r: Regime) -> ArrayLike:
    """
    Psi(v), the inverse of phi.

    Raises:
        ValueError: if v is outside the regime's domain (v <= 0 for m != 1)
    """
    arr = np.asarray(v, dtype=float)
    if not np.all(in_domain(arr, r)):
        raise ValueError(f"psi argument outside the domain of the '{r.kind}' regime")
    if r.kind == LOG:
        out = np.exp(arr)
    elif r.kind == SUB:
        out = ((1.0 - r.m) * arr) ** (1.0 / (1.0 - r.m))
    else:
        out = ((r.m - 1.0) * arr) ** (1.0 / (1.0 - r.m))
    return _out(out, v)


def psi_prime_abs(v: ArrayLike, r: Regime) -> ArrayLike:
    """|Psi'(v)| computed as Psi(v)^m."""
    arr = np.asarray(psi(v, r))
    return _out(arr**r.m, v)


def cutoff_A(v: ArrayLike, r: Regime, c: CutoffParams) -> ArrayLike:
    """
    A_{eps,K} = max{eps^m, min{|Psi'(v)|, (K + eps)^m}}.

    Total: out-of-domain v takes the limiting value of |Psi'| at the domain
    edge, which is the lower bound for m < 1 and the upper bound for m > 1.
    """
    arr = np.asarray(v, dtype=float)
    low, high = c.band(r)
    ok = in_domain(arr, r)
    safe = np.where(ok, arr, 1.0)
    with np.errstate(over="ignore"):
        raw = np.asarray(psi(safe, r)) ** r.m
    edge = low if r.kind == SUB else high
    raw = np.where(ok, raw, edge)
    out = np.clip(np.nan_to_num(raw, nan=edge, posinf=high), low, high)
    return _out(out, v)


def heaviside_kernel(s: ArrayLike, eps: float) -> ArrayLike:
    """Tent kernel h_eps(s) = (2/eps)(1 - |s|/eps)_+."""
    if eps <= 0.0:
        raise ValueError("eps must be positive")
    arr = np.asarray(s, dtype=float)
    return _out((2.0 / eps) * np.maximum(0.0, 1.0 - np.abs(arr) / eps), s)


def smoothed_heaviside(t: ArrayLike, eps: float) -> ArrayLike:
    """
    H_eps(t) = integral_0^t h_eps(s) ds, with H_eps = 0 for t <= 0.

    Closed form 2t/eps - t^2/eps^2 on (0, eps), 1 from eps on.
    """
    if eps <= 0.0:
        raise ValueError("eps must be positive")
    arr = np.asarray(t, dtype=float)
    s = np.clip(arr, 0.0, eps)
    out = 2.0 * s / eps - (s / eps) ** 2
    return _out(out, t)
