"""Acceptance criteria at their frozen tolerances.

Each test prints one ``criterion N PASS|FAIL`` line and records it for the
summary printed at the end of the session.
"""
import math
import time

import numpy as np
import pytest
from conftest import ACCEPTANCE
from oracles import coefficient_radii

from rootflow.complex_dynamics import derivative_roots_complex
from rootflow.harness import config_from_dict, run_experiment, run_pde_check, run_real
from rootflow.io import read_complex_csv, read_state_csv
from rootflow.measures import Dirac, PiecewiseLinearCDF, sample_radii
from rootflow.prediction import LimitLaw, envelope_check, split_derivative_count
from rootflow.radial_dynamics import differentiate_once, from_radii, radii_view, roots_as_complex

N, M, T = 64, 4096, 0.5
UNIFORM_DOC = {"kind": "cdf", "knots": [[0.0, 0.0], [1.0, 1.0]]}
DIRAC_DOC = {"kind": "dirac", "at": 1.0}


def record(number, ok, detail):
    line = f"criterion {number} {'PASS' if ok else 'FAIL'}: {detail}"
    ACCEPTANCE[number] = line
    print(line)
    return ok


def _radial(tmp_path_factory, name, doc):
    out = tmp_path_factory.mktemp(name)
    cfg = config_from_dict({"experiment": "radial", "base_measure": doc, "n": N, "m": M, "t": T, "output_dir": str(out)})
    t0 = time.perf_counter()
    run_experiment(cfg)
    seconds = time.perf_counter() - t0
    return cfg, read_state_csv(out / f"state_t{T:g}.csv"), seconds


@pytest.fixture(scope="session")
def dirac_run(tmp_path_factory):
    return _radial(tmp_path_factory, "dirac", DIRAC_DOC)


@pytest.fixture(scope="session")
def uniform_run(tmp_path_factory):
    return _radial(tmp_path_factory, "uniform", UNIFORM_DOC)


def _empirical_sup_gap(points, weights, cdf):
    """sup |F_emp - F| over the line for a weighted sample and a continuous ``cdf``."""
    order = np.argsort(points)
    x = points[order]
    after = np.cumsum(weights[order]) / weights.sum()
    before = np.concatenate(([0.0], after[:-1]))
    f = cdf(x)
    return float(max(np.max(np.abs(after - f)), np.max(np.abs(before - f))))


def test_criterion_1_dirac_law(dirac_run):
    _, state, seconds = dirac_run
    assert state.deriv_count == math.floor(N * M * T)
    r = radii_view(state).radii
    pts = np.concatenate(([0.0], r))
    w = np.concatenate(([float(state.q)], np.full(r.size, float(state.m))))

    def target(y):
        y = np.clip(y, 0.0, 1.0 - T)
        return T * y / ((1.0 - T) * (1.0 - y))

    gap = _empirical_sup_gap(pts, w, target)
    ok = gap < 0.05 and seconds < 60.0
    record(1, ok, f"Dirac-at-1 sup CDF distance {gap:.4f} < 0.05, run {seconds:.1f} s < 60 s")
    assert ok


def test_criterion_2_uniform_fixed_point(uniform_run):
    _, state, _ = uniform_run
    s = np.sort(radii_view(state).radii)
    x = (np.arange(1, s.size + 1) - 0.5) / N
    # the uniform law is a fixed point of the quantile transport: q(x) = x
    q_err = float(np.max(np.abs(s - x)))
    pde = run_pde_check(config_from_dict({"experiment": "pde-check", "base_measure": UNIFORM_DOC, "t": [0.25, 0.5, 0.75]}))
    psi = max(r["max_psi_residual"] for r in pde.records)
    den = max(r["max_density_residual"] for r in pde.records)
    ok = q_err < 0.05 and psi < 1e-6 and den < 1e-3
    record(
        2,
        ok,
        f"uniform quantile sup error {q_err:.4f} < 0.05 over {s.size} circles, "
        f"residuals {psi:.1e} < 1e-6 and {den:.1e} < 1e-3",
    )
    assert ok


def test_criterion_3_envelope(dirac_run, uniform_run):
    fractions = []
    for (_, state, _), base in ((dirac_run, Dirac(1.0)), (uniform_run, PiecewiseLinearCDF(UNIFORM_DOC["knots"]))):
        radii0 = sample_radii(base, N)
        ell, _ = split_derivative_count(state.deriv_count, M)
        recs = envelope_check(radii_view(state).radii, LimitLaw(base, T), radii0, N, M, ell)
        graded = [r for r in recs if r.inside is not None]
        assert all(r.j >= 4 for r in graded) and graded
        fractions.append(float(np.mean([r.inside for r in graded])))
    ok = all(f == 1.0 for f in fractions)
    record(3, ok, f"envelope pass fraction Dirac {fractions[0]:.3f}, uniform {fractions[1]:.3f} (need 1.0)")
    assert ok


def test_criterion_4_monotonicity():
    cfg = config_from_dict({"experiment": "real", "pairs": 10_000, "n_values": list(range(2, 13)), "seed": 0})
    rep = run_real(cfg)
    violations = sum(r["monotonicity_violations"] for r in rep.records)
    excess = max(r["max_lipschitz_ratio"] - r["n"] / (r["n"] - 1) for r in rep.records)
    ok = violations == 0 and excess <= 2.0**-20 and len(rep.records) == 11
    record(4, ok, f"{violations} order violations in 11 x 10^4 pairs, Lipschitz excess {excess:.1e} <= 2^-20")
    assert ok


def _ladder(rng, n):
    return np.sort(rng.uniform(0.5, 2.0, n))


def test_criterion_5_coefficient_oracle():
    rng = np.random.default_rng(5)
    worst, compared = 0.0, 0
    for n in range(1, 25):
        for m in range(1, 24 // n + 1):
            if n * m < 2:
                continue
            for _ in range(20):
                r = _ladder(rng, n)
                s = from_radii(r, m)
                for k in range(1, n * m):
                    s = differentiate_once(s)
                    got = np.sort(radii_view(s).radii)
                    ref = coefficient_radii(r, m, k)
                    assert got.size == ref.size
                    if ref.size:
                        worst = max(worst, float(np.max(np.abs(got - ref) / ref)))
                    compared += got.size
    ok = worst <= 1e-8
    record(5, ok, f"worst relative radius error {worst:.1e} <= 1e-8 over {compared} radii")
    assert ok


def test_criterion_6_cross_engine():
    rng = np.random.default_rng(6)
    worst, worst_zero, steps = 0.0, 0.0, 0
    for n in range(1, 61):
        for m in range(1, 60 // n + 1):
            if n * m < 2:
                continue
            for _ in range(10):
                s = from_radii(_ladder(rng, n), m)
                for _ in range(1, n * m):
                    z = roots_as_complex(s)
                    got = np.sort(np.abs(derivative_roots_complex(z)))
                    s = differentiate_once(s)
                    ref = np.sort(np.abs(roots_as_complex(s)))
                    assert got.size == ref.size
                    nz = ref > 0
                    if nz.any():
                        worst = max(worst, float(np.max(np.abs(got[nz] - ref[nz]) / ref[nz])))
                    if not nz.all():
                        # a zero radius has no relative error; measure it against the input size
                        size = float(np.max(np.abs(z)))
                        err = float(np.max(got[~nz]))
                        worst_zero = max(worst_zero, err / size if size > 0 else (0.0 if err == 0 else np.inf))
                    steps += 1
    ok = worst <= 1e-8 and worst_zero <= 1e-8
    record(6, ok, f"worst relative radius error {worst:.1e} (zero radii {worst_zero:.1e}) <= 1e-8 over {steps} steps")
    assert ok


def test_criterion_7_circular_conservation(tmp_path):
    cfg = config_from_dict(
        {"experiment": "circular", "n": 12, "m": 15, "steps": [0, 200], "output_dir": str(tmp_path), "emit": ["csv"]}
    )
    run_experiment(cfg)
    z0 = read_complex_csv(tmp_path / "circular_k0.csv")
    z = read_complex_csv(tmp_path / "circular_k200.csv")
    expected = math.factorial(12) ** (1 / 12)
    gm = float(np.exp(np.mean(np.log(np.abs(z)))))
    drift = abs(gm / expected - 1.0)
    spread0 = float(np.ptp(np.abs(z0)))
    spread = float(np.ptp(np.abs(z)))
    ok = drift <= 1e-6 and spread < spread0 and z.size == 180
    record(
        7,
        ok,
        f"geometric mean {gm:.12f} vs (12!)^(1/12) = {expected:.12f}, drift {drift:.1e} <= 1e-6, "
        f"spread {spread:.2e} < {spread0:.2f}",
    )
    assert ok


def _interlaced(u, v, q):
    if q >= 1:
        # one new root below the smallest old one and one in each gap
        return v.size == u.size and np.all(v <= u) and np.all(v[1:] >= u[:-1])
    return v.size == u.size - 1 and np.all(v >= u[:-1]) and np.all(v <= u[1:])


def test_criterion_8_overflow_stress():
    m, n = 2**14, 32
    r = _ladder(np.random.default_rng(8), n)
    s = from_radii(r, m)
    k_end = math.floor(0.75 * n * m)
    broken = 0
    finite = True
    for _ in range(k_end):
        nxt = differentiate_once(s)
        finite = finite and bool(np.all(np.isfinite(nxt.log_roots)))
        broken += not _interlaced(s.log_roots, nxt.log_roots, s.q)
        s = nxt
    radii = radii_view(s).radii
    finite = finite and bool(np.all(np.isfinite(radii))) and np.all(radii > 0)
    ok = finite and broken == 0 and s.deriv_count == k_end
    record(8, ok, f"{k_end} steps at m = 2^14, n = 32: finite {finite}, interlacing broken at {broken} steps")
    assert ok
