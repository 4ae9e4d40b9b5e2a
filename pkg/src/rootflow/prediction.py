"""Limit radial law after differentiating a fraction ``t`` of the degree.

With ``q0`` the quantile function of the initial radial law and ``V`` uniform
on ``[t, 1]``, the limit radial law is that of ``(1 - t / V) q0(V)``.
Equivalently, the sub-probability ``(1 - t) nu_t`` has quantile function::

    x -> x q0(x + t) / (x + t),      0 <= x <= 1 - t.

This module evaluates that law, predicts individual surviving radii with
their error envelope, and checks the two evolution equations satisfied by
its distribution function and density with finite differences.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .measures import EmpiricalMeasure1D, RadialMeasure

__all__ = [
    "LimitLaw",
    "EnvelopeParams",
    "EnvelopeRecord",
    "limit_quantile",
    "limit_cdf",
    "limit_probability_cdf",
    "predicted_radii",
    "envelope_check",
    "pde_residual_psi",
    "pde_residual_density",
    "sample_limit_law",
    "split_derivative_count",
]

_BISECT_ITERS = 64


@dataclass(frozen=True)
class LimitLaw:
    base: RadialMeasure
    t: float

    def __post_init__(self):
        if not 0.0 <= self.t < 1.0:
            raise DomainError(f"t must lie in [0, 1), got {self.t}")


def _check_x(law, x):
    if np.any(np.isnan(x)) or np.any(x < 0) or np.any(x > 1.0 - law.t):
        raise DomainError(f"x must lie in [0, 1 - t] = [0, {1.0 - law.t}]")


def limit_quantile(law: LimitLaw, x):
    """Quantile of ``(1 - t) nu_t`` at level ``x``; vectorized."""
    xa = np.asarray(x, dtype=float)
    _check_x(law, xa)
    s = np.minimum(xa + law.t, 1.0)
    with np.errstate(invalid="ignore", divide="ignore"):
        out = np.where(xa > 0, xa * law.base.quantile(s) / s, 0.0)
    return float(out) if xa.ndim == 0 else out


def limit_cdf(law: LimitLaw, y):
    """Distribution function of ``(1 - t) nu_t`` (total mass ``1 - t``).

    The quantile is inverted by bisection on ``[0, 1 - t]``: the result is
    ``sup{x : limit_quantile(x) <= y}``, which is right-continuous in ``y``.
    """
    ya = np.asarray(y, dtype=float)
    top = 1.0 - law.t
    lo = np.zeros(ya.shape)
    hi = np.full(ya.shape, top)
    full = limit_quantile(law, top) <= ya
    for _ in range(_BISECT_ITERS):
        mid = 0.5 * (lo + hi)
        below = limit_quantile(law, mid) <= ya
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    out = np.where(full, top, np.where(ya < 0, 0.0, lo))
    return float(out) if ya.ndim == 0 else out


def limit_probability_cdf(law: LimitLaw, y):
    """Distribution function of the probability measure ``nu_t`` itself."""
    return limit_cdf(law, y) / (1.0 - law.t)


def split_derivative_count(k: int, m: int) -> tuple[int, int]:
    """Write ``k = l m - q`` with ``0 <= q <= m - 1``; returns ``(l, q)``."""
    ell = -(-k // m)
    return ell, ell * m - k


def predicted_radii(law: LimitLaw, radii_0, nt_floor: int) -> np.ndarray:
    """Centre of the envelope: ``s_j = (j - 1) / (j - 1 + n t) * r_{j + l}``.

    ``nt_floor`` is the number ``l`` of circles consumed; ``j = 1 .. n - l``.
    """
    r = np.asarray(radii_0, dtype=float)
    n = r.size
    ell = int(nt_floor)
    if not 1 <= ell <= n - 1:
        raise DomainError(f"l must lie in [1, n - 1] = [1, {n - 1}], got {ell}")
    j = np.arange(1, n - ell + 1)
    return (j - 1) / (j - 1 + n * law.t) * r[j + ell - 1]


@dataclass(frozen=True)
class EnvelopeParams:
    """Width of the per-index envelope for a run with ``n`` circles of ``m`` points.

    ``eps_n = 3 n log(n) / m``; for ``j >= 4``::

        eta_j = log((j - 1)/(j - 3)) + log((j + 2)/(j - 1)) + max_{j <= p <= n} eps_p
    """

    n: int
    m: int
    t: float

    @property
    def eps_n(self) -> float:
        return self.eps(self.n)

    def eps(self, p: int) -> float:
        return 3.0 * p * math.log(p) / self.m

    def eta(self, j: int) -> float:
        if j < 4:
            raise DomainError("eta_j is defined for j >= 4 only")
        sup_eps = max(self.eps(p) for p in range(j, max(j, self.n) + 1))
        return math.log((j - 1) / (j - 3)) + math.log((j + 2) / (j - 1)) + sup_eps


@dataclass(frozen=True)
class EnvelopeRecord:
    j: int
    ratio: float
    eta: float | None
    inside: bool | None

    def to_json(self) -> dict:
        return {"j": self.j, "ratio": self.ratio, "eta": self.eta, "inside": self.inside}


def envelope_check(observed, law: LimitLaw, radii_0, n: int, m: int, nt_floor: int) -> list[EnvelopeRecord]:
    """Compare observed surviving radii with the predicted ones, index by index.

    For ``j >= 4`` the record says whether ``|log(s_j / s_j_pred)| <= eta_j``.
    Indices 1 to 3 have no envelope; they are reported with ``inside=None``.
    """
    obs = np.asarray(observed, dtype=float)
    pred = predicted_radii(law, radii_0, nt_floor)
    if obs.shape != pred.shape:
        raise DomainError(f"expected {pred.size} observed radii, got {obs.size}")
    params = EnvelopeParams(n, m, law.t)
    out = []
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = obs / pred
    for j in range(1, obs.size + 1):
        ratio = float(ratios[j - 1])
        if j < 4:
            out.append(EnvelopeRecord(j, ratio, None, None))
            continue
        eta = params.eta(j)
        out.append(EnvelopeRecord(j, ratio, eta, bool(abs(math.log(ratio)) <= eta)))
    return out


# ---------------------------------------------------------------------------
# evolution-equation residuals


def _check_band(base, x, t, h, reach):
    if not base.continuous:
        raise DomainError("the evolution equations need a base law without atoms")
    if h <= 0:
        raise DomainError("step h must be positive")
    if t - h < 0 or t + h >= 1:
        raise DomainError("t +/- h must stay inside [0, 1)")
    upper = base.support_upper * (1.0 - t - h)
    if not (x - reach * h > 0 and x + reach * h < upper):
        raise DomainError(f"x = {x} is too close to the edge of the support band (0, {upper})")


def pde_residual_psi(base: RadialMeasure, x: float, t: float, h: float | None = None) -> float:
    """Residual of ``dPsi/dt = x (dPsi/dx) / Psi - 1`` by central differences.

    ``Psi`` is :func:`limit_cdf`; ``h`` defaults to ``1e-4 * support_upper``.
    """
    if h is None:
        h = 1e-4 * base.support_upper
    _check_band(base, x, t, h, 1)
    now = LimitLaw(base, t)
    psi_t = (limit_cdf(LimitLaw(base, t + h), x) - limit_cdf(LimitLaw(base, t - h), x)) / (2 * h)
    psi_x = (limit_cdf(now, x + h) - limit_cdf(now, x - h)) / (2 * h)
    return float(psi_t - (x * psi_x / limit_cdf(now, x) - 1.0))


def _density(base, x, t, h):
    law = LimitLaw(base, t)
    return (limit_cdf(law, x + h) - limit_cdf(law, x - h)) / (2 * h)


def pde_residual_density(base: RadialMeasure, x: float, t: float, h: float | None = None) -> float:
    """Residual of ``dpsi/dt = d/dx ( psi / ((1/x) int_0^x psi) )``.

    The density is itself a central difference of :func:`limit_cdf`, so the
    scheme is nested; ``h`` defaults to ``1e-3 * support_upper``. Requires
    ``x >= 10 h``.
    """
    if h is None:
        h = 1e-3 * base.support_upper
    if x < 10 * h:
        raise DomainError("x must be at least 10 h away from the origin")
    _check_band(base, x, t, h, 2)
    lhs = (_density(base, x, t + h, h) - _density(base, x, t - h, h)) / (2 * h)
    law = LimitLaw(base, t)

    def flux(y):
        return _density(base, y, t, h) * y / limit_cdf(law, y)

    rhs = (flux(x + h) - flux(x - h)) / (2 * h)
    return float(lhs - rhs)


def sample_limit_law(law: LimitLaw, count: int, seed: int = 0) -> EmpiricalMeasure1D:
    """Draws of ``(1 - t / V) q0(V)`` with ``V`` uniform on ``[t, 1]``.

    ``seed == 0`` uses the stratified points ``V_i = t + (1 - t)(2i - 1)/(2 count)``;
    any other seed draws ``V`` from a seeded generator.
    """
    if count < 1:
        raise DomainError("count must be positive")
    t = law.t
    if seed == 0:
        v = t + (1.0 - t) * (2 * np.arange(1, count + 1) - 1) / (2.0 * count)
    else:
        v = np.random.default_rng(seed).uniform(t, 1.0, size=count)
    return EmpiricalMeasure1D((1.0 - t / v) * law.base.quantile(v))
