"""Experiment runners: each returns a :class:`ComparisonReport` and writes its files."""
from __future__ import annotations

import math
import platform
import time
from pathlib import Path

import numpy as np

from .. import io
from ..complex_dynamics import (
    circular_derivative,
    derivative_roots_complex,
    log_abs_product,
    near_collisions,
    perturb_arguments,
    sample_iid_arguments,
)
from ..errors import ConfigError, DomainError
from ..measures import EmpiricalMeasure1D, kolmogorov_distance, levy_distance, sample_radii
from ..prediction import (
    LimitLaw,
    envelope_check,
    limit_probability_cdf,
    limit_quantile,
    pde_residual_density,
    pde_residual_psi,
    sample_limit_law,
    split_derivative_count,
)
from ..radial_dynamics import differentiate_once, evolve, from_radii, radii_view, roots_as_complex
from ..real_dynamics import derivative_roots_batch
from . import svg
from .config import ExperimentConfig, _measure
from .report import Check, ComparisonReport, thresholds

__all__ = [
    "run_experiment",
    "run_radial",
    "run_real",
    "run_circular",
    "run_complex",
    "run_pde_check",
    "radial_root_measure",
]

# size of the stratified sample standing in for the limit law in Levy distances
LIMIT_SAMPLE = 1 << 14
# relative positions of the residual grid inside the support band
PDE_GRID = (0.2, 0.35, 0.5, 0.65, 0.8)
# residuals below this are rounding noise and carry no slope information
SLOPE_FLOOR = 1e-9


class _Out:
    """Writes files under ``output_dir`` for the requested ``emit`` kinds."""

    def __init__(self, config: ExperimentConfig):
        self.dir = Path(config.output_dir) if config.output_dir is not None else None
        self.emit = set(config.emit)
        self.files: list[str] = []
        if self.dir is not None:
            self.dir.mkdir(parents=True, exist_ok=True)

    def write(self, kind: str, name: str, writer, *args) -> None:
        if self.dir is None or kind not in self.emit:
            return
        writer(self.dir / name, *args)
        self.files.append(name)


def _tag(t: float) -> str:
    return f"t{t:g}"


def _radii(config: ExperimentConfig, base) -> np.ndarray:
    if config.radii is not None:
        r = np.asarray(config.radii, dtype=float)
        if r.size < 1 or np.any(r <= 0) or np.any(np.diff(r) <= 0):
            raise ConfigError("radii must be positive and strictly increasing")
        return r
    try:
        return sample_radii(base, config.n)
    except DomainError as exc:
        raise ConfigError(f"cannot sample radii from the base measure: {exc}") from None


def radial_root_measure(state) -> EmpiricalMeasure1D:
    """Radial part of the root distribution: each circle weighs ``m``, the origin ``q``."""
    r = radii_view(state).radii
    pts = np.concatenate(([0.0], r))
    w = np.concatenate(([float(state.q)], np.full(r.size, float(state.m))))
    return EmpiricalMeasure1D(pts, w)


# ---------------------------------------------------------------------------


def run_radial(config: ExperimentConfig, out: _Out | None = None) -> ComparisonReport:
    """Differentiate the structured polynomial ``floor(n m t)`` times for each ``t``.

    Surviving radii are compared with the limit law (Kolmogorov and Levy
    distances, quantile sup error at ``x_j = (j - 1/2)/n``) and with the
    per-index envelope.
    """
    out = out or _Out(config)
    n, m = config.n, config.m
    if m < 2 or n < 8:
        raise ConfigError("radial runs need m >= 2 and n >= 8")
    base = config.measure()
    radii = _radii(config, base)
    n = radii.size
    limits = thresholds("radial")
    report = ComparisonReport("radial")
    state = from_radii(radii, m)
    for t in config.t_values:
        t0 = time.perf_counter()
        k = int(math.floor(n * m * t))
        state, stats = evolve(state, k - state.deriv_count)
        ell, q = split_derivative_count(k, m)
        s = radii_view(state).radii
        law = LimitLaw(base, t)
        roots = radial_root_measure(state)
        kolm = kolmogorov_distance(roots, lambda y: limit_probability_cdf(law, y))
        levy = levy_distance(roots, sample_limit_law(law, LIMIT_SAMPLE))
        x = np.minimum((np.arange(1, s.size + 1) - 0.5) / n, 1.0 - t)
        q_err = float(np.max(np.abs(s - limit_quantile(law, x)))) if s.size else 0.0
        graded, env_json = [], []
        if 1 <= ell <= n - 1:
            recs = envelope_check(s, law, radii, n, m, ell)
            env_json = [r.to_json() for r in recs]
            graded = [r for r in recs if r.inside is not None]
        frac = float(np.mean([r.inside for r in graded])) if graded else None
        worst = float(max(abs(math.log(r.ratio)) for r in graded)) if graded else None
        rec = {
            "t": t,
            "k": k,
            "ell": ell,
            "q": q,
            "surviving_circles": int(s.size),
            "levy_distance_radial": levy,
            "kolmogorov_distance": kolm,
            "quantile_sup_error": q_err,
            "max_log_ratio_error": worst,
            "envelope_pass_fraction": frac,
            "max_solver_iterations": stats.max_iterations,
        }
        report.records.append(rec)
        report.runtime_ms[_tag(t)] = 1e3 * (time.perf_counter() - t0)
        tag = _tag(t)
        report.checks += [
            Check(f"{tag}:kolmogorov_distance", kolm, limits["kolmogorov_distance"]),
            Check(f"{tag}:levy_distance_radial", levy, limits["levy_distance_radial"]),
            Check(f"{tag}:quantile_sup_error", q_err, limits["quantile_sup_error"]),
        ]
        if frac is not None:
            report.checks.append(
                Check(f"{tag}:envelope_pass_fraction", frac, limits["envelope_pass_fraction"], at_least=True)
            )
        out.write("csv", f"state_{tag}.csv", io.write_state_csv, state)
        out.write("json", f"envelope_{tag}.json", io.write_json, env_json)
        out.write(
            "svg",
            f"quantiles_{tag}.svg",
            svg.lines,
            [(x, s, "#1f4e9c"), (x, limit_quantile(law, x), "#c0392b")],
            f"surviving radii (blue) vs limit quantile (red), t={t:g}",
        )
    report.summary = {
        "n": n,
        "m": m,
        "base_measure": base.to_json(),
        "max_kolmogorov_distance": max(r["kolmogorov_distance"] for r in report.records),
        "max_levy_distance_radial": max(r["levy_distance_radial"] for r in report.records),
    }
    return report


# ---------------------------------------------------------------------------


def _ordered_pairs(rng, pairs, n):
    """Random sorted vectors ``a <= b`` componentwise; a quarter carry exact ties."""
    a = np.sort(rng.uniform(-1.0, 1.0, (pairs, n)), axis=1)
    step = rng.exponential(0.1, (pairs, n)) * (rng.random((pairs, n)) < 0.7)
    b = np.sort(a + step, axis=1)
    tied = rng.random(pairs) < 0.25
    # rounding is nondecreasing, so the order survives
    a[tied] = np.round(a[tied] * 4) / 4
    b[tied] = np.round(b[tied] * 4) / 4
    return a, b


def run_real(config: ExperimentConfig, out: _Out | None = None) -> ComparisonReport:
    """Random-pair campaign for order preservation and the Levy-Lipschitz bound.

    For each size, ``pairs`` ordered pairs (half with random positive
    weights shared by both members) test that the derivative map preserves
    the componentwise order, with slack ``2^-40`` relative. ``pairs``
    nearby pairs with unit weights give the largest observed ratio of Levy
    distances after and before differentiation.
    """
    out = out or _Out(config)
    limits = thresholds("real")
    rng = np.random.default_rng(config.seed)
    sizes = config.n_values or [config.n]
    if any(int(n) != n or n < 2 for n in sizes):
        raise ConfigError("real-line sizes must be integers >= 2")
    report = ComparisonReport("real")
    slack = limits["monotonicity_slack"]
    total_violations, worst_excess = 0, -np.inf
    for n in sizes:
        t0 = time.perf_counter()
        a, b = _ordered_pairs(rng, config.pairs, n)
        w = np.where(np.arange(config.pairs)[:, None] % 2 == 0, 1.0, rng.uniform(0.5, 2.0, (config.pairs, n)))
        da, db = derivative_roots_batch(a, w), derivative_roots_batch(b, w)
        bad = np.any(da > db + slack * np.maximum(1.0, np.abs(db)), axis=1)
        violations = int(np.count_nonzero(bad))
        c = np.sort(a + rng.normal(0.0, 0.05, a.shape), axis=1)
        dau, dc = derivative_roots_batch(a), derivative_roots_batch(c)
        ratios = []
        for i in range(config.pairs):
            before = levy_distance(a[i], c[i])
            if before > 0:
                ratios.append(levy_distance(dau[i], dc[i]) / before)
        top = float(max(ratios)) if ratios else 0.0
        bound = n / (n - 1)
        excess = top - bound
        total_violations += violations
        worst_excess = max(worst_excess, excess)
        report.records.append(
            {
                "n": int(n),
                "pairs": config.pairs,
                "monotonicity_violations": violations,
                "max_lipschitz_ratio": top,
                "lipschitz_bound": bound,
                "lipschitz_excess": excess,
            }
        )
        report.runtime_ms[f"n{n}"] = 1e3 * (time.perf_counter() - t0)
        out.write("csv", f"roots_n{n}_example.csv", io.write_real_roots_csv, da[0])
    report.summary = {"monotonicity_violations": total_violations, "max_lipschitz_excess": worst_excess}
    report.checks = [
        Check("monotonicity_violations", total_violations, limits["monotonicity_violations"]),
        Check("lipschitz_excess", worst_excess, limits["lipschitz_excess"]),
    ]
    out.write("csv", "real_campaign.csv", _write_records, report.records)
    return report


def _write_records(path, records) -> None:
    import csv

    keys = list(records[0])
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(keys)
        for r in records:
            w.writerow([repr(r[k]) if isinstance(r[k], float) else r[k] for k in keys])


# ---------------------------------------------------------------------------


def run_circular(config: ExperimentConfig, out: _Out | None = None) -> ComparisonReport:
    """Apply the circular derivative to ``prod (z^m - r_j^m)`` and track conservation.

    Radii default to ``1, 2, ..., n``. Each snapshot records the geometric
    mean of the moduli (conserved), the modulus spread and near collisions.
    """
    out = out or _Out(config)
    limits = thresholds("circular")
    radii = np.asarray(config.radii, dtype=float) if config.radii is not None else np.arange(1.0, config.n + 1)
    try:
        z = roots_as_complex(from_radii(radii, config.m))
    except DomainError as exc:
        raise ConfigError(str(exc)) from None
    deg = z.size
    gm0 = float(np.exp(np.mean(np.log(radii))))
    steps = sorted(set(config.steps))
    report = ComparisonReport("circular")
    t0 = time.perf_counter()
    log_prev = log_abs_product(z)
    worst_step = 0.0
    for k in range(steps[-1] + 1):
        if k in steps:
            gm = float(np.exp(log_abs_product(z) / deg))
            mod = np.abs(z)
            report.records.append(
                {
                    "k": k,
                    "geometric_mean": gm,
                    "geometric_mean_drift": abs(gm / gm0 - 1.0),
                    "radius_spread": float(mod.max() - mod.min()),
                    "near_collisions": near_collisions(z),
                }
            )
            out.write("csv", f"circular_k{k}.csv", io.write_complex_csv, z)
            out.write("svg", f"circular_k{k}.svg", svg.scatter, z, f"circular derivative, k={k}")
        if k == steps[-1]:
            break
        z = circular_derivative(z)
        log_now = log_abs_product(z)
        worst_step = max(worst_step, abs(math.expm1(log_now - log_prev)))
        log_prev = log_now
    report.runtime_ms["total"] = 1e3 * (time.perf_counter() - t0)
    first, last = report.records[0], report.records[-1]
    report.summary = {
        "geometric_mean_expected": gm0,
        "max_geometric_mean_drift": max(r["geometric_mean_drift"] for r in report.records),
        "max_step_log_product_change": worst_step,
        "spread_first": first["radius_spread"],
        "spread_last": last["radius_spread"],
    }
    report.checks = [
        Check("geometric_mean_drift", report.summary["max_geometric_mean_drift"], limits["geometric_mean_drift"]),
        Check("step_log_product_change", worst_step, limits["step_log_product_change"]),
    ]
    if last["k"] > first["k"]:
        report.checks.append(Check("spread_ratio", last["radius_spread"] / first["radius_spread"], 1.0))
    return report


# ---------------------------------------------------------------------------


def _radius_error(moduli, reference) -> float:
    a, b = np.sort(moduli), np.sort(reference)
    top = float(b.max())
    denom = np.where(b > 0, b, top)
    return float(np.max(np.abs(a - b) / denom))


def run_complex(config: ExperimentConfig, out: _Out | None = None) -> ComparisonReport:
    """Generic-engine runs from perturbed or i.i.d. arguments.

    Every snapshot compares the moduli of the generic roots with those of the
    structured radial run at the same derivative count, by Levy distance and
    by largest relative gap between sorted moduli.
    """
    out = out or _Out(config)
    kind = config.experiment
    if kind not in ("perturbed", "complex-iid"):
        raise ConfigError(f"run_complex handles perturbed and complex-iid, not {kind!r}")
    base = config.measure()
    radii = _radii(config, base)
    state = from_radii(radii, config.m)
    structured = roots_as_complex(state)
    if kind == "perturbed":
        scale = config.scale if config.scale is not None else 1.0 / config.m
        z = perturb_arguments(structured, scale, config.seed)
    else:
        scale = None
        z = sample_iid_arguments(radii, config.m, config.seed)
    steps = sorted(set(config.steps))
    if steps[-1] > state.degree - 1:
        raise ConfigError(f"steps go up to {steps[-1]} but the degree is {state.degree}")
    report = ComparisonReport(kind)
    t0 = time.perf_counter()
    for k in range(steps[-1] + 1):
        if k in steps:
            ref = np.abs(roots_as_complex(state))
            report.records.append(
                {
                    "k": k,
                    "levy_distance_radial": levy_distance(np.abs(z), ref),
                    "max_relative_radius_error": _radius_error(np.abs(z), ref),
                    "near_collisions": near_collisions(z),
                }
            )
            out.write("csv", f"{kind}_k{k}.csv", io.write_complex_csv, z)
            out.write("svg", f"{kind}_k{k}.svg", svg.scatter, z, f"{kind}, k={k}")
        if k == steps[-1]:
            break
        z = derivative_roots_complex(z)
        state = differentiate_once(state)
    report.runtime_ms["total"] = 1e3 * (time.perf_counter() - t0)
    report.summary = {
        "scale": scale,
        "max_levy_distance_radial": max(r["levy_distance_radial"] for r in report.records),
        "max_relative_radius_error": max(r["max_relative_radius_error"] for r in report.records),
    }
    if kind == "perturbed":
        limits = thresholds("perturbed")
        report.checks.append(
            Check("levy_distance_radial", report.summary["max_levy_distance_radial"], limits["levy_distance_radial"])
        )
        if scale == 0:
            report.checks.append(
                Check("scale0_relative_error", report.summary["max_relative_radius_error"], limits["scale0_relative_error"])
            )
    return report


# ---------------------------------------------------------------------------


def run_pde_check(config: ExperimentConfig, out: _Out | None = None) -> ComparisonReport:
    """Residuals of both evolution equations on a grid, per base measure.

    The grid is ``t`` from the config times ``x = A (1 - t) c`` for the
    fractions ``c`` in ``PDE_GRID``. The convergence slope compares the
    distribution-function residual at the two step sizes ``h_values`` (times
    ``A``) and is reported where the residual exceeds rounding noise.
    """
    out = out or _Out(config)
    limits = thresholds("pde-check")
    docs = config.bases or [config.base_measure]
    report = ComparisonReport("pde-check")
    for i, doc in enumerate(docs):
        base = _measure(doc)
        if not base.continuous:
            raise ConfigError(f"base {doc!r} has atoms; the evolution equations need a continuous law")
        top = base.support_upper
        t0 = time.perf_counter()
        rows_psi, rows_den, slopes = [], [], []
        try:
            for t in config.t_values:
                for c in PDE_GRID:
                    x = top * (1.0 - t) * c
                    rows_psi.append((t, x, pde_residual_psi(base, x, t)))
                    rows_den.append((t, x, pde_residual_density(base, x, t)))
                    if len(config.h_values) >= 2:
                        h1, h2 = config.h_values[0] * top, config.h_values[1] * top
                        r1 = abs(pde_residual_psi(base, x, t, h1))
                        r2 = abs(pde_residual_psi(base, x, t, h2))
                        if r1 > SLOPE_FLOOR and r2 > 0:
                            slopes.append(math.log(r1 / r2) / math.log(h1 / h2))
        except DomainError as exc:
            raise ConfigError(f"base {doc!r}: {exc}") from None
        psi_max = max(abs(r[2]) for r in rows_psi)
        den_max = max(abs(r[2]) for r in rows_den)
        slope = float(np.median(slopes)) if slopes else None
        report.records.append(
            {
                "base_measure": base.to_json(),
                "max_psi_residual": psi_max,
                "max_density_residual": den_max,
                "richardson_slope_psi": slope,
            }
        )
        report.runtime_ms[f"base{i}"] = 1e3 * (time.perf_counter() - t0)
        report.checks += [
            Check(f"base{i}:psi_residual", psi_max, limits["uniform_psi_residual"]),
            Check(f"base{i}:density_residual", den_max, limits["uniform_density_residual"]),
        ]
        if slope is not None:
            report.checks += [
                Check(f"base{i}:slope_low", slope, limits["richardson_slope_low"], at_least=True),
                Check(f"base{i}:slope_high", slope, limits["richardson_slope_high"]),
            ]
        out.write("csv", f"residual_psi_{i}.csv", io.write_residual_csv, rows_psi)
        out.write("csv", f"residual_density_{i}.csv", io.write_residual_csv, rows_den)
    return report


# ---------------------------------------------------------------------------

_RUNNERS = {
    "radial": run_radial,
    "real": run_real,
    "circular": run_circular,
    "complex-iid": run_complex,
    "perturbed": run_complex,
    "pde-check": run_pde_check,
}


def _versions() -> dict:
    import numba
    import scipy

    from .. import __version__

    return {
        "rootflow": __version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "numba": numba.__version__,
    }


def run_experiment(config: ExperimentConfig) -> ComparisonReport:
    """Run the configured experiment; with an ``output_dir``, write its files.

    ``report.json`` (when ``json`` is emitted) depends only on the config.
    ``manifest.json`` is always written and holds the config echo, package
    versions, wall time and the list of files.
    """
    out = _Out(config)
    t0 = time.perf_counter()
    report = _RUNNERS[config.experiment](config, out)
    wall = 1e3 * (time.perf_counter() - t0)
    out.write("json", "report.json", io.write_json, report.to_json())
    if out.dir is not None:
        manifest = {
            "config": config.to_json(),
            "versions": _versions(),
            "wall_time_ms": wall,
            "runtime_ms": report.runtime_ms,
            "outputs": list(out.files),
        }
        io.write_json(out.dir / "manifest.json", manifest)
    return report
