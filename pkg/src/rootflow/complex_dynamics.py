"""Generic complex root dynamics: ordinary and circular derivatives.

Roots are found by Aberth-Ehrlich iteration on the implicit polynomial: the
Newton ratio is assembled from the root sums ``S1 = sum 1/(z - z_j)`` and
``S2 = sum 1/(z - z_j)^2`` of the current root set, so no coefficient is ever
formed. Root sets are 1-D complex arrays.
"""
from __future__ import annotations

import numpy as np
from scipy.cluster.hierarchy import fcluster, linkage

from .errors import DomainError, NumericalFailure

__all__ = [
    "derivative_roots_complex",
    "circular_derivative",
    "perturb_arguments",
    "sample_iid_arguments",
    "near_collisions",
    "log_abs_product",
]

EPS = np.finfo(float).eps
STEP_TOL = 1e-13
MAX_SWEEPS = 500
SUM_RULE_TOL = 1e-10
MOMENT_TOL = 1e-8
REAL_TOL = 1e-8
CLUSTER_LINK = 0.05
WINDING_POINTS = 256
CALM_SWEEPS = 4
MULTIPLE_TOL = float(np.sqrt(EPS))
STALL_REACH = 1e-6


def _validated(roots) -> np.ndarray:
    z = np.asarray(roots, dtype=complex).ravel()
    if z.size < 1:
        raise DomainError("root set must be nonempty")
    if not np.all(np.isfinite(z)):
        raise DomainError("roots must be finite")
    return z


def _exponent(z) -> int:
    """Binary exponent of the largest modulus (0 for the zero set)."""
    top = float(np.max(np.abs(z)))
    return int(np.frexp(top)[1]) if top > 0 else 0


def _ldexp(z, e: int) -> np.ndarray:
    # exact scaling by 2**e, part by part, valid for subnormal inputs too
    out = np.empty(z.shape, dtype=complex)
    out.real = np.ldexp(z.real, e)
    out.imag = np.ldexp(z.imag, e)
    return out


def _root_sums(w, vals, mult):
    """``S1 = g a`` and ``S2 = g^2 b`` with ``g`` near the largest ``1/|w - z_j|``.

    Returning the factors keeps ``S1^2`` and ``S2`` from overflowing when an
    iterate sits very close to an input root. ``size`` is ``sum mult/|w - z_j|``
    divided by ``g``.
    """
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        rec = 1.0 / (w[:, None] - vals[None, :])
        # a power of two, so the rescaling changes no rounding
        e = np.frexp(np.abs(rec).max(axis=1))[1]
        g = np.ldexp(1.0, e)
        r = _ldexp(rec, -e[:, None])
        inv = mult[None, :] * r
        a = inv.sum(axis=1)
        b = (inv * r).sum(axis=1)
    size = np.abs(inv).sum(axis=1)
    return g, a, b, size


def _deflation(w, fixed_vals, fixed_mult):
    if fixed_vals.size == 0:
        return np.zeros(w.shape, dtype=complex)
    return (fixed_mult[None, :] / (w[:, None] - fixed_vals[None, :])).sum(axis=1)


def _aberth(ratio, w0, diam):
    """Jacobi-style Aberth sweeps from ``w0``; returns roots and a noise mask.

    ``ratio(w)`` returns the Newton ratio of the target polynomial at ``w`` and
    a flag telling whether its value there is already at rounding level. A
    root stops once its correction falls below ``1e-13 * diam`` (or a few
    ulps of the iterates). Where the flag is set the ratio carries no
    information, so the root only takes the repulsive part of the Aberth
    step (the limit of a huge ratio); this keeps stray iterates from being
    trapped in an unresolved cluster. The
    sweeps end when every root still moving was flagged in one of the last
    two sweeps (such roots breathe across the edge of the cluster), and
    those roots are returned in the mask.
    """
    w = w0.astype(complex).copy()
    active = np.ones(w.size, dtype=bool)
    # never below a few ulps of the iterates themselves
    tol = max(STEP_TOL * diam, 8.0 * EPS * float(np.max(np.abs(w0))))
    worst = np.inf
    # sweeps since each root was last flagged
    since = np.full(w.size, CALM_SWEEPS)
    for _ in range(MAX_SWEEPS):
        idx = np.flatnonzero(active)
        if idx.size == 0:
            return w, active
        wa = w[idx]
        nr, settled = ratio(wa)
        since[idx] = np.where(settled, 0, since[idx] + 1)
        calm = since[idx] < CALM_SWEEPS
        diff = wa[:, None] - w[None, :]
        diff[np.arange(idx.size), idx] = np.inf
        with np.errstate(divide="ignore", invalid="ignore"):
            sigma = (1.0 / diff).sum(axis=1)
            corr = nr / (1.0 - nr * sigma)
            small = np.abs(corr) < tol
            corr = np.where(settled & ~small, -1.0 / sigma, corr)
        if np.all(calm | small):
            active[idx[small]] = False
            return w, active
        bad = ~np.isfinite(corr)
        if np.any(bad):
            # landed on a pole or on another root: nudge off it
            corr[bad] = 1e-8 * diam * np.exp(1j * (1.0 + idx[bad]))
        w[idx] = wa - corr
        active[idx[small]] = False
        worst = float(np.max(np.abs(corr[~small])))
    raise NumericalFailure(f"Aberth iteration did not converge in {MAX_SWEEPS} sweeps (worst step {worst:.3e})")


def _diameter(z):
    c = z.mean()
    d = 2.0 * float(np.max(np.abs(z - c)))
    return d if d > 0 else max(float(np.max(np.abs(z))), 1.0)


def _offsets(k, size):
    # distinct directions so symmetric configurations do not stay symmetric
    return size * np.exp(1j * (0.5 + 2.1 * np.arange(k)))


def _circle_start(k, center, radius):
    return center + radius * np.exp(1j * (2 * np.pi * np.arange(k) / k + 0.37))


def _solve(ratio, w0, center, radius, diam):
    try:
        return _aberth(ratio, w0, diam)
    except NumericalFailure:
        return _aberth(ratio, _circle_start(w0.size, center, radius), diam)


def _cluster_mask(free, noisy, diam):
    """The single cluster among the rounding-limited roots, or ``None``.

    The flagged roots are tried as one cluster first, then grouped by single
    linkage at ``CLUSTER_LINK * diam``; exactly one group with two or more
    members must remain. Unflagged roots that stopped inside the group's
    disk, or failing that within twice its radius, join the group before its
    separation from the rest is judged.
    """
    idx = np.flatnonzero(noisy)
    if idx.size < 2:
        return None
    seeds = [noisy]
    pts = np.column_stack([free[idx].real, free[idx].imag])
    labels = fcluster(linkage(pts, "single"), CLUSTER_LINK * diam, "distance")
    groups = np.flatnonzero(np.bincount(labels) >= 2)
    if groups.size == 1:
        seed = np.zeros(free.size, dtype=bool)
        seed[idx[labels == groups[0]]] = True
        seeds.append(seed)
    for seed in seeds:
        for widen in (1.0, 2.0):
            mask = _absorb(free, seed, widen)
            if _separated(free, mask):
                return mask
    return None


def _absorb(free, mask, widen):
    """Grow ``mask`` by the roots within ``widen`` times its radius, to a fixed point."""
    while True:
        c0, reach = _disk(free[mask])
        grown = mask | (np.abs(free - c0) <= widen * reach)
        if np.array_equal(grown, mask):
            return mask
        mask = grown


def _disk(members):
    c0 = members.mean()
    return c0, float(np.max(np.abs(members - c0)))


def _separated(free, mask):
    c0, reach = _disk(free[mask])
    rest = free[~mask]
    return rest.size == 0 or reach < 0.5 * float(np.min(np.abs(rest - c0)))


def _cluster_count(free, mask, vals, mult):
    """Number of roots of ``P'`` in the cluster, by the argument principle.

    The winding of ``P'/P = S1`` around a circle a few noise radii out, plus
    the distinct roots of ``P`` inside it, minus the exact copies there.
    Returns ``None`` when no safe circle exists.
    """
    c0, reach = _disk(free[mask])
    others = np.concatenate([free[~mask], vals])
    gap = np.abs(others - c0)
    gap = gap[gap > reach]
    outer = float(np.min(gap)) if gap.size else np.inf
    rho = 4.0 * reach if not np.isfinite(outer) else np.sqrt(reach * outer)
    if not 1.25 * reach <= rho or rho == 0:
        return None
    w = c0 + rho * np.exp(2j * np.pi * np.arange(WINDING_POINTS) / WINDING_POINTS)
    s1 = _root_sums(w, vals, mult)[1]
    if not np.all(np.isfinite(s1)) or np.any(s1 == 0):
        return None
    steps = np.angle(np.roll(s1, -1) / s1)
    if np.max(np.abs(steps)) > 0.5 * np.pi:
        return None
    turns = steps.sum() / (2 * np.pi)
    inside = int(np.count_nonzero(np.abs(vals - c0) < rho))
    return int(round(turns)) + inside


def _surplus(free, noisy, vals, mult, diam):
    """Indices of iterates in excess of the roots their cluster holds.

    Candidates are the rounding-limited cluster and every well separated
    group of the single-linkage tree of the iterates narrower than
    ``STALL_REACH * diam``: iterates can also stall in a tight cluster
    without being flagged, once their steps fall below tolerance.
    """
    masks = []
    mask = _cluster_mask(free, noisy, diam)
    if mask is not None:
        masks.append(mask)
    if free.size >= 2:
        pts = np.column_stack([free.real, free.imag])
        members = [[i] for i in range(free.size)]
        for left, right, dist, _ in linkage(pts, "single"):
            if dist > 2.0 * STALL_REACH * diam:
                break
            members.append(members[int(left)] + members[int(right)])
            group = np.zeros(free.size, dtype=bool)
            group[members[-1]] = True
            if _disk(free[group])[1] > STALL_REACH * diam:
                continue
            if _separated(free, group) and not any(np.array_equal(group, g) for g in masks):
                masks.append(group)
    out = []
    for mask in masks:
        if np.any(mask[out]):
            continue
        count = _cluster_count(free, mask, vals, mult)
        extra = np.count_nonzero(mask) - count if count is not None else 0
        if count is not None and count >= 0 and extra > 0:
            out.extend(np.flatnonzero(mask)[:extra])
    return np.unique(np.array(out, dtype=int))


def _is_multiple(c, M, vals, mult):
    """Whether ``P'`` can have an ``M``-fold root at ``c`` to working precision.

    That needs ``P^(j)(c) = 0`` for ``j <= M``, equivalently the power sums
    ``S_k(c) = sum 1/(c - z_j)^k`` vanish for ``k <= M``; each is compared
    with its sum of moduli.
    """
    with np.errstate(divide="ignore", invalid="ignore", over="ignore", under="ignore"):
        rec = 1.0 / (c - vals)
        e = np.frexp(np.abs(rec).max())[1]
        r = np.ldexp(rec.real, -e) + 1j * np.ldexp(rec.imag, -e)
        power = mult.astype(complex)
        for _ in range(M):
            power = power * r
            if not abs(power.sum()) <= MULTIPLE_TOL * np.abs(power).sum():
                return False
    return True


def _collapse(free, mask, target_sum):
    """Replace the cluster by copies of the centre given by the sum identity."""
    centre = (target_sum - free[~mask].sum()) / np.count_nonzero(mask)
    out = free.copy()
    out[mask] = centre
    return out


def _moment_errors(z, out):
    """Relative misfit of the first two power sums of the derivative roots.

    With ``e_k`` the elementary symmetric functions of the roots, those of
    ``P'`` are ``(N - k) / N * e_k``; only ``k = 1, 2`` are used.
    """
    deg = z.size
    e1 = z.sum()
    e2 = 0.5 * (e1 * e1 - (z * z).sum())
    d1 = (deg - 1) / deg * e1
    d2 = (deg - 2) / deg * e2
    scale = max(float(np.abs(z).sum()), EPS)
    sum_err = abs(out.sum() - d1) / scale
    sq_err = abs((out * out).sum() - (d1 * d1 - 2.0 * d2)) / scale**2
    return sum_err, sq_err


def _real_checked(z, out, diam):
    """Real input: the output must be real and interlace the sorted input."""
    if np.max(np.abs(out.imag)) > REAL_TOL * diam:
        raise NumericalFailure("real input produced non-real derivative roots")
    x = np.sort(z.real)
    w = np.sort(out.real)
    slack = REAL_TOL * diam
    if np.any(w < x[:-1] - slack) or np.any(w > x[1:] + slack):
        raise NumericalFailure("derivative roots do not interlace the real input")
    return w.astype(complex)


def derivative_roots_complex(roots) -> np.ndarray:
    """Roots of ``P'`` for ``P = prod (z - z_j)``, with multiplicity.

    An input root repeated ``k`` times (exact equality) yields ``k - 1`` exact
    output copies; the remaining roots come from Aberth iteration with
    Newton ratio ``S1 / (S1^2 - S2)`` deflated by those copies, started from
    the input minus its point farthest from the centroid. A single cluster
    of roots that can only be located to rounding level is returned as an
    exact multiple root.

    The sum and the sum of squares of the output are checked against the
    values implied by the input; for real input the output must also be real
    and interlace it, and is returned sorted with zero imaginary parts. On a
    mismatch the iteration is restarted from a circle, which breaks
    symmetric traps.

    Raises
    ------
    DomainError
        If fewer than two roots are given.
    NumericalFailure
        If no start gives converged roots passing both checks.
    """
    z = _validated(roots)
    if z.size < 2:
        raise DomainError("differentiation needs at least two roots")
    # both operators commute with scaling, so work at unit size
    e = _exponent(z)
    return _ldexp(_derivative(_ldexp(z, -e)), e)


def _derivative(z):
    vals, mult = np.unique(z, return_counts=True)
    mult = mult.astype(float)
    fixed_mask = mult > 1
    fixed_vals, fixed_mult = vals[fixed_mask], mult[fixed_mask] - 1
    copies = np.repeat(fixed_vals, fixed_mult.astype(int))
    if vals.size == 1:
        return copies

    def ratio(w):
        g, a, b, size = _root_sums(w, vals, mult)
        settled = np.isfinite(g) & (np.abs(a) <= 2.0 * vals.size * EPS * size)
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            # S1 / (S1^2 - S2 - S1 D) with the common factor g divided out
            return a / (g * (a * a - b) - a * _deflation(w, fixed_vals, fixed_mult)), settled

    center = z.mean()
    diam = _diameter(z)
    spread = np.abs(vals - center)
    start = np.delete(vals, np.argmax(spread))
    k = start.size
    starts = [
        start + _offsets(k, diam / (4.0 * z.size)),
        _circle_start(k, center, max(float(spread.mean()), diam / 4)),
    ]
    target = (z.size - 1) / z.size * z.sum() - copies.sum()
    report = "no start converged"
    for w0 in starts:
        try:
            free, noisy = _aberth(ratio, w0, diam)
            surplus = _surplus(free, noisy, vals, mult, diam)
            if surplus.size:
                # a symmetric cluster can hold more iterates than roots:
                # move the surplus out and resume
                w1 = free.copy()
                w1[surplus] = _circle_start(surplus.size, center, float(spread.max()))
                free, noisy = _aberth(ratio, w1, diam)
            mask = _cluster_mask(free, noisy, diam)
            if mask is not None:
                # growing the cluster can swallow honest roots; keep it only
                # if its centre can carry that many roots
                centre = _collapse(free, mask, target)[mask][0]
                if not _is_multiple(centre, int(np.count_nonzero(mask)), vals, mult):
                    mask = None
        except NumericalFailure as exc:
            report = str(exc)
            continue
        out = np.concatenate([copies, free if mask is None else _collapse(free, mask, target)])
        sum_err, sq_err = _moment_errors(z, out)
        if sum_err <= SUM_RULE_TOL and sq_err <= MOMENT_TOL:
            return _real_checked(z, out, diam) if np.all(z.imag == 0) else out
        report = f"power-sum check failed (sum {sum_err:.2e}, squares {sq_err:.2e})"
    raise NumericalFailure(report)


def circular_derivative(roots, N: int | None = None) -> np.ndarray:
    """Roots of ``H = z P' - (N/2) P``, which has the same degree as ``P``.

    ``|prod roots|`` is preserved since ``H(0) = -(N/2) P(0)`` and the leading
    coefficient of ``H`` is ``(N/2)`` times that of ``P``. The Newton ratio is
    ``(z S1 - N/2) / ((1 - N/2) S1 + z (S1^2 - S2))``.
    """
    z = _validated(roots)
    deg = z.size
    if N is None:
        N = deg
    if N != deg:
        raise DomainError(f"N must equal the degree {deg}")
    e = _exponent(z)
    return _ldexp(_circular(_ldexp(z, -e), N), e)


def _circular(z, N):
    half = N / 2.0
    vals, mult = np.unique(z, return_counts=True)
    mult = mult.astype(float)
    fixed_mult = np.where(vals == 0, mult, mult - 1)
    keep = fixed_mult > 0
    fixed_vals, fixed_mult = vals[keep], fixed_mult[keep]
    copies = np.repeat(fixed_vals, fixed_mult.astype(int))
    moving = vals[vals != 0]
    if moving.size == 0:
        return copies

    def ratio(w):
        g, a, b, size = _root_sums(w, vals, mult)
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            h = w * (g * a) - half
            settled = np.isfinite(g) & (np.abs(h) <= 2.0 * vals.size * EPS * (np.abs(w) * g * size + half))
            # H / (H' - H D) with numerator and denominator divided by g^2
            hs = w * a / g - half / g / g
            dhs = (1.0 - half) * a / g + w * (a * a - b)
            return hs / (dhs - hs * _deflation(w, fixed_vals, fixed_mult)), settled

    diam = _diameter(z)
    logs = np.log(np.abs(moving))
    radius = float(np.exp(np.log(np.abs(z[z != 0])).mean()))
    start = moving * np.exp(-(logs - np.log(radius)) / (4.0 * N) + 0.5j / N)
    free = _solve(ratio, start, 0.0, radius, diam)[0]
    return np.concatenate([copies, free])


def perturb_arguments(roots, scale: float, seed: int) -> np.ndarray:
    """Rotate each root by its own angle drawn uniformly from ``[-scale, scale]``."""
    z = _validated(roots)
    if scale < 0:
        raise DomainError("scale must be nonnegative")
    theta = np.random.default_rng(seed).uniform(-scale, scale, size=z.size)
    return z * np.exp(1j * theta)


def sample_iid_arguments(radii, m: int, seed: int) -> np.ndarray:
    """``m`` points with i.i.d. uniform arguments on each circle of radius ``radii[j]``."""
    r = np.asarray(radii, dtype=float).ravel()
    if r.size == 0 or np.any(r <= 0) or not np.all(np.isfinite(r)):
        raise DomainError("radii must be positive and finite")
    if m < 1:
        raise DomainError("m must be positive")
    theta = np.random.default_rng(seed).uniform(0.0, 2 * np.pi, size=(r.size, m))
    return (r[:, None] * np.exp(1j * theta)).ravel()


def near_collisions(roots, rel: float = 1e-8) -> int:
    """Number of distinct root pairs closer than ``rel * diameter`` (not merged)."""
    z = _validated(roots)
    d = np.abs(z[:, None] - z[None, :])
    iu = np.triu_indices(z.size, 1)
    return int(np.count_nonzero(d[iu] < rel * _diameter(z)))


def log_abs_product(roots) -> float:
    """``log |prod z_j|`` accumulated in log-modulus space."""
    return float(np.sum(np.log(np.abs(_validated(roots)))))
