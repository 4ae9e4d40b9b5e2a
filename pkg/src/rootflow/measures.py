"""Radial probability measures, empirical measures and the distances between them.

A radial measure is a compactly supported probability measure on ``[0, inf)``.
It is described by its distribution function and its generalized inverse
``q(alpha) = inf{y >= 0 : F(y) >= alpha}``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Union

import numpy as np
from numba import njit
from scipy.optimize import linear_sum_assignment

from .errors import DegenerateMeasureError, DomainError

__all__ = [
    "RadialMeasure",
    "Dirac",
    "Empirical",
    "PiecewiseLinearCDF",
    "PowerLaw",
    "EmpiricalMeasure1D",
    "quantile",
    "cdf",
    "sample_radii",
    "levy_distance",
    "levy_prokhorov_bound",
    "levy_prokhorov_distance_2d",
    "kolmogorov_distance",
    "measure_from_json",
    "measure_to_json",
    "TIE_JITTER",
]

TIE_JITTER = 2.0**-40
LEVY_TOL = 2.0**-46


def _as_out(x, scalar):
    return float(x) if scalar else x


class RadialMeasure:
    """Base class. Subclasses implement ``_cdf`` and ``_quantile`` on arrays."""

    kind: str = ""

    @property
    def support_upper(self) -> float:
        raise NotImplementedError

    @property
    def continuous(self) -> bool:
        """Whether the distribution function has no atoms."""
        return False

    def cdf(self, x):
        xa = np.asarray(x, dtype=float)
        return _as_out(self._cdf(xa), xa.ndim == 0)

    def quantile(self, alpha):
        a = np.asarray(alpha, dtype=float)
        if np.any(np.isnan(a)) or np.any(a < 0.0) or np.any(a > 1.0):
            raise DomainError(f"quantile level must lie in [0, 1], got {alpha!r}")
        out = self._quantile(a)
        out = np.where(a == 0.0, 0.0, out)
        return _as_out(out, a.ndim == 0)

    def to_json(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class Dirac(RadialMeasure):
    """Point mass at ``at``."""

    at: float
    kind = "dirac"

    def __post_init__(self):
        if not np.isfinite(self.at) or self.at < 0:
            raise DomainError("Dirac location must be a finite nonnegative real")

    @property
    def support_upper(self) -> float:
        return float(self.at)

    def _cdf(self, x):
        return np.where(x >= self.at, 1.0, 0.0)

    def _quantile(self, a):
        return np.full(a.shape, float(self.at))

    def to_json(self):
        return {"kind": "dirac", "at": float(self.at)}


@dataclass(frozen=True, eq=False)
class Empirical(RadialMeasure):
    """Uniform measure on a finite multiset of nonnegative reals."""

    points: np.ndarray
    kind = "empirical"

    def __post_init__(self):
        p = np.sort(np.asarray(self.points, dtype=float).ravel())
        if p.size == 0:
            raise DomainError("empirical measure needs at least one point")
        if not np.all(np.isfinite(p)) or p[0] < 0:
            raise DomainError("empirical radial points must be finite and nonnegative")
        p.setflags(write=False)
        object.__setattr__(self, "points", p)

    @property
    def support_upper(self) -> float:
        return float(self.points[-1])

    def _cdf(self, x):
        return np.searchsorted(self.points, x, side="right") / self.points.size

    def _quantile(self, a):
        n = self.points.size
        levels = np.arange(1, n + 1) / n
        idx = np.minimum(np.searchsorted(levels, a, side="left"), n - 1)
        return self.points[idx]

    def to_json(self):
        return {"kind": "empirical", "points": self.points.tolist()}


@dataclass(frozen=True, eq=False)
class PiecewiseLinearCDF(RadialMeasure):
    """Distribution function interpolating ``knots = [(x, F(x)), ...]`` linearly.

    ``F`` is 0 left of the first knot (so a positive first value is an atom)
    and the last knot must reach 1.
    """

    knots: np.ndarray
    kind = "cdf"

    def __post_init__(self):
        k = np.asarray(self.knots, dtype=float)
        if k.ndim != 2 or k.shape[1] != 2 or k.shape[0] < 1:
            raise DomainError("knots must be a list of (x, F) pairs")
        x, f = k[:, 0], k[:, 1]
        if not (np.all(np.isfinite(k)) and x[0] >= 0):
            raise DomainError("knot abscissae must be finite and nonnegative")
        if np.any(np.diff(x) <= 0):
            raise DomainError("knot abscissae must be strictly increasing")
        if np.any(np.diff(f) < 0) or f[0] < 0 or f[-1] != 1.0:
            raise DomainError("knot values must be nondecreasing in [0, 1] and end at 1")
        k.setflags(write=False)
        object.__setattr__(self, "knots", k)

    @property
    def support_upper(self) -> float:
        x, f = self.knots[:, 0], self.knots[:, 1]
        return float(x[np.argmax(f >= 1.0)])

    @property
    def continuous(self) -> bool:
        return bool(self.knots[0, 1] == 0.0)

    def _cdf(self, x):
        kx, kf = self.knots[:, 0], self.knots[:, 1]
        return np.where(x < kx[0], 0.0, np.interp(x, kx, kf))

    def _quantile(self, a):
        kx, kf = self.knots[:, 0], self.knots[:, 1]
        i = np.searchsorted(kf, a, side="left")
        i = np.clip(i, 0, kf.size - 1)
        lo = np.maximum(i - 1, 0)
        df = kf[i] - kf[lo]
        with np.errstate(invalid="ignore", divide="ignore"):
            frac = np.where(df > 0, (a - kf[lo]) / df, 0.0)
        return np.where(i == 0, kx[0], kx[lo] + frac * (kx[i] - kx[lo]))

    def to_json(self):
        return {"kind": "cdf", "knots": self.knots.tolist()}


@dataclass(frozen=True)
class PowerLaw(RadialMeasure):
    """``F(x) = (x / scale) ** exponent`` on ``[0, scale]``.

    Smooth quantile ``scale * alpha ** (1 / exponent)``; used where finite
    differences of the quantile must not hit knots.
    """

    exponent: float
    scale: float = 1.0
    kind = "power"

    def __post_init__(self):
        if not (self.exponent > 0 and self.scale > 0):
            raise DomainError("power law needs positive exponent and scale")

    @property
    def support_upper(self) -> float:
        return float(self.scale)

    @property
    def continuous(self) -> bool:
        return True

    def _cdf(self, x):
        y = np.clip(x / self.scale, 0.0, 1.0)
        return np.where(x < 0, 0.0, y**self.exponent)

    def _quantile(self, a):
        return self.scale * a ** (1.0 / self.exponent)

    def to_json(self):
        return {"kind": "power", "exponent": float(self.exponent), "A": float(self.scale)}


def quantile(mu: RadialMeasure, alpha):
    """Generalized inverse ``inf{y >= 0 : mu([0, y]) >= alpha}``; vectorized."""
    return mu.quantile(alpha)


def cdf(mu: RadialMeasure, x):
    """``mu([0, x])``; vectorized."""
    return mu.cdf(x)


def sample_radii(mu: RadialMeasure, n: int) -> np.ndarray:
    """Deterministic radii ladder ``r_j = q((2j - 1) / (2n))``, strictly increasing.

    Entries that tie with a neighbour (atoms) or vanish are shifted by
    ``j * delta`` with ``delta = 2**-40 * support_upper``.

    Raises
    ------
    DegenerateMeasureError
        If the measure is the point mass at 0.
    """
    if n < 1:
        raise DomainError("n must be a positive integer")
    top = mu.support_upper
    if top <= 0.0:
        raise DegenerateMeasureError("cannot sample positive increasing radii from a point mass at 0")
    j = np.arange(1, n + 1)
    r = np.asarray(mu.quantile((2 * j - 1) / (2.0 * n)), dtype=float)
    delta = TIE_JITTER * top
    tied = np.zeros(n, dtype=bool)
    eq = r[1:] == r[:-1]
    tied[1:] |= eq
    tied[:-1] |= eq
    tied |= r <= 0.0
    if tied.any():
        r = np.where(tied, r + j * delta, r)
        if np.any(np.diff(r) <= 0):
            r = np.asarray(mu.quantile((2 * j - 1) / (2.0 * n)), dtype=float) + j * delta
    return r


def measure_from_json(doc: Union[str, dict]) -> RadialMeasure:
    """Build a measure from ``{"kind": "cdf" | "dirac" | "empirical" | "power", ...}``."""
    if isinstance(doc, str):
        doc = json.loads(doc)
    kind = doc.get("kind")
    try:
        if kind == "cdf":
            return PiecewiseLinearCDF(doc["knots"])
        if kind == "dirac":
            return Dirac(float(doc["at"]))
        if kind == "empirical":
            return Empirical(doc["points"])
        if kind == "power":
            return PowerLaw(float(doc["exponent"]), float(doc.get("A", 1.0)))
    except KeyError as exc:
        raise DomainError(f"measure document of kind {kind!r} lacks field {exc}") from None
    raise DomainError(f"unknown measure kind {kind!r}")


def measure_to_json(mu: RadialMeasure) -> dict:
    return mu.to_json()


# ---------------------------------------------------------------------------
# one-dimensional empirical measures and the Levy metric


@dataclass(frozen=True, eq=False)
class EmpiricalMeasure1D:
    """Weighted point cloud on the real line.

    Weights default to ``1 / count``; explicit weights are normalized.
    """

    points: np.ndarray
    weights: np.ndarray = field(default=None)

    def __post_init__(self):
        p = np.asarray(self.points, dtype=float).ravel()
        if p.size == 0:
            raise DomainError("empirical measure needs at least one point")
        if not np.all(np.isfinite(p)):
            raise DomainError("points must be finite")
        if self.weights is None:
            w = np.full(p.size, 1.0 / p.size)
        else:
            w = np.asarray(self.weights, dtype=float).ravel()
            if w.shape != p.shape or np.any(w < 0) or w.sum() <= 0:
                raise DomainError("weights must be nonnegative, one per point, not all zero")
            w = w / w.sum()
        order = np.argsort(p, kind="stable")
        p, w = p[order], w[order]
        p.setflags(write=False)
        w.setflags(write=False)
        object.__setattr__(self, "points", p)
        object.__setattr__(self, "weights", w)

    @property
    def count(self) -> int:
        return self.points.size

    def cumulative(self) -> np.ndarray:
        """CDF value at each point, ties included (right-continuous)."""
        c = np.cumsum(self.weights)
        c[-1] = 1.0
        last = np.searchsorted(self.points, self.points, side="right") - 1
        return c[last]

    def cdf(self, x):
        xa = np.asarray(x, dtype=float)
        c = np.concatenate(([0.0], np.cumsum(self.weights)))
        c[-1] = 1.0
        out = c[np.searchsorted(self.points, xa, side="right")]
        return _as_out(out, xa.ndim == 0)


def _as_empirical(p) -> EmpiricalMeasure1D:
    return p if isinstance(p, EmpiricalMeasure1D) else EmpiricalMeasure1D(p)


@njit(cache=True)
def _one_side(x, fx, y, fy, eps):
    # sup_i Fx(x_i) - Fy(x_i + eps) <= eps
    j = 0
    ny = y.shape[0]
    for i in range(x.shape[0]):
        thr = x[i] + eps
        while j < ny and y[j] <= thr:
            j += 1
        f = fy[j - 1] if j > 0 else 0.0
        if fx[i] - f > eps:
            return False
    return True


@njit(cache=True)
def _levy_bisect(x, fx, y, fy, tol):
    if _one_side(x, fx, y, fy, 0.0) and _one_side(y, fy, x, fx, 0.0):
        return 0.0
    lo, hi = 0.0, 1.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if _one_side(x, fx, y, fy, mid) and _one_side(y, fy, x, fx, mid):
            hi = mid
        else:
            lo = mid
    return hi


def levy_distance(p, q) -> float:
    """Levy distance between two step distribution functions.

    ``inf{eps > 0 : F_p(x - eps) - eps <= F_q(x) <= F_p(x + eps) + eps  for all x}``,
    located by bisection on ``eps`` to ``2**-46``. Feasibility of an ``eps`` is
    decided on the jump points only, in one merged pass.

    Parameters
    ----------
    p, q : EmpiricalMeasure1D or array_like
        Arrays are read as equally weighted samples.

    Returns
    -------
    float
        0 exactly when the two distribution functions coincide, otherwise an
        upper approximation within ``2**-46`` of the infimum.
    """
    a, b = _as_empirical(p), _as_empirical(q)
    return float(_levy_bisect(a.points, a.cumulative(), b.points, b.cumulative(), LEVY_TOL))


def kolmogorov_distance(p, cdf_fn) -> float:
    """``sup_x |F_p(x) - G(x)|`` for a continuous distribution function ``G``."""
    a = _as_empirical(p)
    x = np.unique(a.points)
    g = np.asarray(cdf_fn(x), dtype=float)
    right = a.cdf(x)
    left = np.concatenate(([0.0], right[:-1]))
    return float(max(np.max(np.abs(right - g)), np.max(np.abs(left - g))))


def _matching_bound(dist: np.ndarray) -> float:
    d = np.sort(dist)
    n = d.size
    # a fraction (n - k - 1)/n of the pairs is farther apart than d[k]
    tail = (n - np.arange(1, n + 1)) / n
    return float(min(np.min(np.maximum(d, tail)), 1.0))


def levy_prokhorov_bound(p, q, *, exact_limit: int = 1500) -> float:
    """Upper bound on the Levy-Prokhorov distance between two planar point clouds.

    Both clouds are equally weighted and have equal size (repeat points to
    encode integer weights). Any bijection pairing the clouds certifies
    ``LP <= min_k max(d_(k), #{pairs farther than d_(k)} / N)``; the pairing is a
    min-sum assignment for clouds up to ``exact_limit`` points and a
    radius/angle sort otherwise.
    """
    a = np.asarray(p, dtype=complex).ravel()
    b = np.asarray(q, dtype=complex).ravel()
    if a.size != b.size or a.size == 0:
        raise DomainError("point sets must be nonempty and of equal total mass")
    if a.size <= exact_limit:
        cost = np.abs(a[:, None] - b[None, :])
        rows, cols = linear_sum_assignment(cost)
        return _matching_bound(cost[rows, cols])

    def order(z):
        r = np.abs(z)
        ring = np.floor(r / (np.max(r) + 1e-300) * np.sqrt(z.size)).astype(int)
        return np.lexsort((np.angle(z), ring))

    return _matching_bound(np.abs(a[order(a)] - b[order(b)]))


# alias matching the planar-distance naming used elsewhere
levy_prokhorov_distance_2d = levy_prokhorov_bound
