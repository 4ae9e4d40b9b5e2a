"""Iterated differentiation of ``P(z) = z^q Q(z^m)`` with positive roots of ``Q``.

Differentiating such a polynomial keeps the shape. With ``rho_j`` the roots of
``Q``:

* ``q >= 1``: ``P' = z^(q-1) S(z^m)`` with ``S = q Q + m x Q'``. ``S`` has one
  root in each of ``(0, rho_1), (rho_1, rho_2), ...`` and ``q`` drops by one;
* ``q == 0``: ``P' = m z^(m-1) Q'(z^m)``. ``Q'`` has one root between
  consecutive roots of ``Q``, so ``n`` drops by one and ``q`` becomes ``m - 1``.

States store ``u_j = log rho_j = m log r_j``; radii are only formed on demand.
Scalar prefactors are not tracked.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _radial_kernel as _k
from .errors import DomainError, NumericalFailure

__all__ = [
    "RadialState",
    "RadiiView",
    "StepStats",
    "from_radii",
    "differentiate_once",
    "differentiate_k",
    "evolve",
    "radii_view",
    "roots_as_complex",
]


@dataclass(frozen=True, eq=False)
class RadialState:
    """Root data of ``z^q Q(z^m)``: sorted log-roots of ``Q``, ``m``, ``q``."""

    log_roots: np.ndarray
    m: int
    q: int = 0
    deriv_count: int = 0

    def __post_init__(self):
        u = np.array(self.log_roots, dtype=float).ravel()
        if not np.all(np.isfinite(u)):
            raise DomainError("log-roots must be finite")
        if np.any(np.diff(u) < 0):
            raise DomainError("log-roots must be sorted ascending")
        if int(self.m) != self.m or self.m < 1:
            raise DomainError("m must be a positive integer")
        if not 0 <= self.q <= self.m - 1:
            raise DomainError(f"q must lie in [0, m - 1], got {self.q}")
        if self.deriv_count < 0:
            raise DomainError("deriv_count must be nonnegative")
        u.setflags(write=False)
        object.__setattr__(self, "log_roots", u)
        object.__setattr__(self, "m", int(self.m))
        object.__setattr__(self, "q", int(self.q))
        object.__setattr__(self, "deriv_count", int(self.deriv_count))

    @property
    def n(self) -> int:
        return self.log_roots.size

    @property
    def degree(self) -> int:
        return self.q + self.n * self.m


@dataclass(frozen=True, eq=False)
class RadiiView:
    radii: np.ndarray
    n: int
    zero_multiplicity: int


@dataclass(frozen=True)
class StepStats:
    """What :func:`evolve` verified along the way."""

    steps: int
    max_iterations: int


def from_radii(radii, m: int) -> RadialState:
    """State of ``prod_j (z^m - r_j^m)`` from strictly increasing positive radii."""
    r = np.asarray(radii, dtype=float).ravel()
    if r.size == 0:
        raise DomainError("need at least one radius")
    if not np.all(np.isfinite(r)) or np.any(r <= 0):
        raise DomainError("radii must be finite and positive")
    if np.any(np.diff(r) <= 0):
        raise DomainError("radii must be strictly increasing")
    if int(m) != m or m < 1:
        raise DomainError("m must be a positive integer")
    return RadialState(m * np.log(r), int(m), 0, 0)


_MESSAGES = {
    _k.NO_CONVERGENCE: "root solve did not converge in 200 iterations",
    _k.INTERLACING: "computed root left its interlacing interval",
    _k.NONFINITE: "non-finite value in root solve",
}


def evolve(state: RadialState, k: int) -> tuple[RadialState, StepStats]:
    """Apply ``k`` differentiations, checking interlacing and finiteness each step.

    Raises
    ------
    DomainError
        If ``k`` is negative or exceeds ``degree - 1``.
    NumericalFailure
        If any step fails; ``interval`` carries the offending bracket in log space.
    """
    if int(k) != k or k < 0:
        raise DomainError("k must be a nonnegative integer")
    if k > max(state.degree - 1, 0):
        raise DomainError(f"k = {k} exceeds degree - 1 = {state.degree - 1}")
    if k == 0:
        return state, StepStats(0, 0)
    u, q, status, done, lo, hi, worst = _k.run(np.array(state.log_roots), state.m, state.q, int(k))
    if status != _k.OK:
        raise NumericalFailure(
            f"{_MESSAGES.get(status, 'step failed')} at derivative {state.deriv_count + done + 1}",
            interval=(lo, hi),
        )
    return RadialState(u, state.m, int(q), state.deriv_count + int(k)), StepStats(int(k), int(worst))


def differentiate_k(state: RadialState, k: int) -> RadialState:
    """``k``-fold composition of :func:`differentiate_once`."""
    return evolve(state, k)[0]


def differentiate_once(state: RadialState) -> RadialState:
    """One differentiation step (see module docstring for both cases)."""
    if state.n == 0 and state.q == 0:
        raise DomainError("the constant polynomial has no roots to differentiate")
    return evolve(state, 1)[0]


def radii_view(state: RadialState) -> RadiiView:
    r = np.exp(state.log_roots / state.m)
    r.setflags(write=False)
    return RadiiView(r, state.n, state.q)


def roots_as_complex(state: RadialState) -> np.ndarray:
    """All ``q + n m`` roots: ``q`` zeros, then ``r_j e^{2 pi i k / m}``."""
    r = radii_view(state).radii
    w = np.exp(2j * np.pi * np.arange(state.m) / state.m)
    return np.concatenate([np.zeros(state.q, dtype=complex), (r[:, None] * w[None, :]).ravel()])
