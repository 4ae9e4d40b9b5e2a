"""Critical points of real-rooted polynomials, computed at the root level.

For roots ``z_1 <= ... <= z_n`` and positive weights ``w_j`` the map studied here
sends the roots to the zeros of ``sum_j w_j prod_{l != j} (z - z_l)``. A root of
multiplicity ``k`` stays a root with multiplicity ``k - 1``; every other zero
is the unique root of ``sum_j w_j / (z - z_j)`` in one gap between
consecutive distinct roots.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, NumericalFailure

__all__ = [
    "RealRootMultiset",
    "weighted_derivative_roots",
    "repeated_derivative",
    "derivative_roots_batch",
    "precedes",
]

REL_TOL = 2.0**-46
MAX_ITER = 200


@dataclass(frozen=True, eq=False)
class RealRootMultiset:
    """Sorted real roots (with repetition) and one positive weight per root."""

    roots: np.ndarray
    weights: np.ndarray = None

    def __post_init__(self):
        z = np.asarray(self.roots, dtype=float).ravel()
        w = np.ones_like(z) if self.weights is None else np.asarray(self.weights, dtype=float).ravel()
        if w.shape != z.shape:
            raise DomainError("need exactly one weight per root")
        if not (np.all(np.isfinite(z)) and np.all(np.isfinite(w))):
            raise DomainError("roots and weights must be finite")
        if np.any(w <= 0):
            raise DomainError("weights must be positive")
        order = np.argsort(z, kind="stable")
        z, w = z[order], w[order]
        z.setflags(write=False)
        w.setflags(write=False)
        object.__setattr__(self, "roots", z)
        object.__setattr__(self, "weights", w)

    @property
    def n(self) -> int:
        return self.roots.size


def _gap_roots(z, w):
    """Zeros of ``sum_j w_j / (x - z_j)`` in every gap, batched.

    ``z`` has shape (B, d) with strictly increasing rows, ``w`` matches.
    Returns shape (B, d - 1).
    """
    lo = z[:, :-1].copy()
    hi = z[:, 1:].copy()
    zz = z[:, None, :]
    ww = w[:, None, :]
    # distances in units of the gap keep tiny gaps from overflowing
    gap = (hi - lo)[:, :, None]
    for _ in range(MAX_ITER):
        mid = 0.5 * (lo + hi)
        width = hi - lo
        scale = np.maximum(np.abs(lo), np.abs(hi))
        done = (width <= REL_TOL * scale) | (mid <= lo) | (mid >= hi)
        if np.all(done):
            return mid
        with np.errstate(divide="ignore", over="ignore"):
            f = np.sum(ww / ((mid[:, :, None] - zz) / gap), axis=2)
        pos = f > 0
        hit = ~done & (f == 0)
        # f decreases across each gap: positive means the zero lies to the right
        lo = np.where(hit | (~done & pos), mid, lo)
        hi = np.where(hit | (~done & ~pos), mid, hi)
    bad = np.argwhere(~done)[0]
    raise NumericalFailure(
        "bisection did not converge in 200 iterations",
        interval=(float(lo[tuple(bad)]), float(hi[tuple(bad)])),
    )


def _grouped(z, w):
    vals, start, counts = np.unique(z, return_index=True, return_counts=True)
    gw = np.add.reduceat(w, start)
    return vals, counts, gw


def weighted_derivative_roots(s: RealRootMultiset) -> RealRootMultiset:
    """Roots of ``sum_j w_j prod_{l != j}(z - z_l)``, with multiplicity.

    Ties are detected by exact equality. Output weights are all 1.

    Raises
    ------
    DomainError
        If fewer than two roots are given.
    NumericalFailure
        If a gap solve does not converge in 200 bisection steps.
    """
    if s.n < 2:
        raise DomainError("differentiation needs at least two roots")
    vals, counts, gw = _grouped(s.roots, s.weights)
    parts = [np.repeat(vals, counts - 1)]
    if vals.size > 1:
        parts.append(_gap_roots(vals[None, :], gw[None, :])[0])
    out = np.sort(np.concatenate(parts))
    return RealRootMultiset(out)


def derivative_roots_batch(roots, weights=None) -> np.ndarray:
    """Vectorized :func:`weighted_derivative_roots` over the rows of ``roots``.

    Rows are sorted first. Rows are grouped by their number of distinct
    values, so ties cost no per-row Python work.
    """
    order = np.argsort(np.asarray(roots, dtype=float), axis=1, kind="stable")
    z = np.take_along_axis(np.asarray(roots, dtype=float), order, axis=1)
    if weights is None:
        w = np.ones_like(z)
    else:
        w = np.take_along_axis(np.asarray(weights, dtype=float), order, axis=1)
    if z.ndim != 2 or z.shape[1] < 2:
        raise DomainError("differentiation needs at least two roots per row")
    batch, d = z.shape
    first = np.ones_like(z, dtype=bool)
    first[:, 1:] = np.diff(z, axis=1) != 0
    distinct = first.sum(axis=1)
    out = np.empty((batch, d - 1))
    for c in np.unique(distinct):
        rows = np.flatnonzero(distinct == c)
        zr, wr, fr = z[rows], w[rows], first[rows]
        # a value of multiplicity k keeps k - 1 copies: exactly the non-first entries
        repeated = zr[~fr].reshape(rows.size, d - c)
        if c == 1:
            out[rows] = repeated
            continue
        vals = zr[fr].reshape(rows.size, c)
        gw = np.add.reduceat(wr.ravel(), np.flatnonzero(fr.ravel())).reshape(rows.size, c)
        out[rows] = np.sort(np.concatenate([repeated, _gap_roots(vals, gw)], axis=1), axis=1)
    return out


def repeated_derivative(s: RealRootMultiset, k: int) -> RealRootMultiset:
    """Roots of the ``k``-th derivative of ``prod (z - z_j)`` (unit weights)."""
    if not 0 <= k <= s.n - 1:
        raise DomainError(f"k must lie in [0, {s.n - 1}], got {k}")
    cur = RealRootMultiset(s.roots)
    for _ in range(k):
        cur = weighted_derivative_roots(cur)
    return cur


def precedes(a, b, slack: float = 0.0) -> bool:
    """Componentwise order of sorted vectors: ``a_j <= b_j + slack`` for all j."""
    a = np.sort(np.asarray(a, dtype=float))
    b = np.sort(np.asarray(b, dtype=float))
    return bool(np.all(a <= b + slack))
