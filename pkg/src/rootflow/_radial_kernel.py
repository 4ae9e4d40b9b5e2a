"""Compiled inner loop of the radial engine.

Log-roots ``u_j = log(rho_j)`` of ``Q`` are updated in place of the roots
themselves. With ``x = exp(v)`` every term of the rational root equation
becomes ``1 / (1 - exp(u_j - v))``, which depends only on ``u_j - v`` and so
never overflows regardless of ``m``.
"""
import math

import numpy as np
from numba import njit

# exp(-45) is below half an ulp of 1: such terms are exactly 1 (or 0)
CUTOFF = 45.0
MAX_ITER = 200
TOL_FACTOR = 2.0**-46

OK = 0
NO_CONVERGENCE = 1
INTERLACING = 2
NONFINITE = 3
CONSTANT = 4


@njit(cache=True)
def _inside(r, lo, hi):
    if r > lo and r < hi:
        return True
    # adjacent floats leave no interior point; an endpoint is then the answer
    mid = lo + 0.5 * (hi - lo)
    return (mid == lo or mid == hi) and lo <= r <= hi


@njit(cache=True, error_model="numpy")
def _eval(v, vals, cnts, below, left, c0):
    """h(v) = c0 + sum_i cnts_i / (1 - exp(vals_i - v)) and dh/dv.

    ``left`` indexes the last group below ``v`` (or -1); groups beyond CUTOFF
    are summed in closed form through the ``below`` prefix counts.
    """
    f = c0
    df = 0.0
    i = left
    while i >= 0:
        d = vals[i] - v
        if d < -CUTOFF:
            f += below[i] + cnts[i]
            break
        e = math.expm1(d)
        f -= cnts[i] / e
        df -= cnts[i] * (e + 1.0) / (e * e)
        i -= 1
    i = left + 1
    ng = vals.shape[0]
    while i < ng:
        d = vals[i] - v
        if d > CUTOFF:
            break
        e = math.expm1(d)
        f -= cnts[i] / e
        df -= cnts[i] * (e + 1.0) / (e * e)
        i += 1
    return f, df


@njit(cache=True, error_model="numpy")
def _solve_gap(lo, hi, vals, cnts, below, left, c0, tol):
    """Zero of the decreasing function h on (lo, hi): safeguarded Newton.

    The bracket is kept at every iteration; a Newton step leaving it is
    replaced by bisection. A Newton step smaller than ``tol`` is accepted once
    the sign change is confirmed at distance ``tol`` on both sides.
    Returns (root, iterations); root is NaN on failure.
    """
    x = 0.5 * (lo + hi)
    for it in range(MAX_ITER):
        f, df = _eval(x, vals, cnts, below, left, c0)
        if f > 0.0:
            lo = x
        elif f < 0.0:
            hi = x
        else:
            return x, it
        if hi - lo <= tol:
            return 0.5 * (lo + hi), it
        xn = x - f / df if df != 0.0 else lo
        if not (xn > lo and xn < hi):
            xn = 0.5 * (lo + hi)
        elif abs(xn - x) < 0.25 * tol:
            a = xn - tol
            b = xn + tol
            if a > lo:
                fa, _ = _eval(a, vals, cnts, below, left, c0)
                if fa > 0.0:
                    lo = a
            if b < hi:
                fb, _ = _eval(b, vals, cnts, below, left, c0)
                if fb < 0.0:
                    hi = b
            if hi - lo <= 2.0 * tol:
                return xn, it
        x = xn
    return np.nan, MAX_ITER


@njit(cache=True, error_model="numpy")
def step(u, m, q):
    """One differentiation of z^q Q(z^m) given sorted log-roots ``u`` of Q.

    Returns (new_u, new_q, status, bad_lo, bad_hi, max_iter).
    """
    n = u.shape[0]
    if n == 0:
        if q == 0:
            return u, q, CONSTANT, 0.0, 0.0, 0
        return u, q - 1, OK, 0.0, 0.0, 0

    vals = np.empty(n)
    cnts = np.empty(n)
    ng = 0
    for i in range(n):
        if ng > 0 and u[i] == vals[ng - 1]:
            cnts[ng - 1] += 1.0
        else:
            vals[ng] = u[i]
            cnts[ng] = 1.0
            ng += 1
    vals = vals[:ng]
    cnts = cnts[:ng]
    below = np.empty(ng)
    acc = 0.0
    for i in range(ng):
        below[i] = acc
        acc += cnts[i]

    tol = TOL_FACTOR * max(1.0, abs(u[0]) + abs(u[n - 1]))
    nout = n if q >= 1 else n - 1
    out = np.empty(nout)
    k = 0
    maxit = 0
    c0 = q / m
    for g in range(ng):
        if q >= 1:
            hi = vals[g]
            if g == 0:
                width = 1.0
                lo = hi - width
                for _ in range(2100):
                    f, _df = _eval(lo, vals, cnts, below, -1, c0)
                    if f > 0.0:
                        break
                    width *= 2.0
                    lo = hi - width
                pole_lo = -np.inf
            else:
                lo = vals[g - 1]
                pole_lo = lo
            r, it = _solve_gap(lo, hi, vals, cnts, below, g - 1, c0, tol)
            maxit = max(maxit, it)
            if not np.isfinite(r):
                return out, q, NO_CONVERGENCE if it >= MAX_ITER else NONFINITE, pole_lo, hi, maxit
            if not _inside(r, pole_lo, hi):
                return out, q, INTERLACING, pole_lo, hi, maxit
            out[k] = r
            k += 1
            for _ in range(int(cnts[g]) - 1):
                out[k] = vals[g]
                k += 1
        else:
            for _ in range(int(cnts[g]) - 1):
                out[k] = vals[g]
                k += 1
            if g < ng - 1:
                lo = vals[g]
                hi = vals[g + 1]
                r, it = _solve_gap(lo, hi, vals, cnts, below, g, 0.0, tol)
                maxit = max(maxit, it)
                if not np.isfinite(r):
                    return out, q, NO_CONVERGENCE if it >= MAX_ITER else NONFINITE, lo, hi, maxit
                if not _inside(r, lo, hi):
                    return out, q, INTERLACING, lo, hi, maxit
                out[k] = r
                k += 1
    new_q = q - 1 if q >= 1 else m - 1
    return out, new_q, OK, 0.0, 0.0, maxit


@njit(cache=True, error_model="numpy")
def run(u, m, q, k):
    """``k`` successive steps. Returns (u, q, status, steps_done, lo, hi, max_iter)."""
    worst = 0
    for s in range(k):
        nu, nq, status, lo, hi, it = step(u, m, q)
        worst = max(worst, it)
        if status != OK:
            return u, q, status, s, lo, hi, worst
        u = nu
        q = nq
    return u, q, OK, k, 0.0, 0.0, worst
