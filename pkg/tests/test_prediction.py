import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from rootflow.errors import DomainError
from rootflow.measures import Dirac, PiecewiseLinearCDF, PowerLaw
from rootflow.prediction import (
    EnvelopeParams,
    LimitLaw,
    envelope_check,
    limit_cdf,
    limit_probability_cdf,
    limit_quantile,
    pde_residual_density,
    pde_residual_psi,
    predicted_radii,
    sample_limit_law,
    split_derivative_count,
)

UNIFORM = PiecewiseLinearCDF([[0.0, 0.0], [1.0, 1.0]])


class TestLimitQuantile:
    @given(st.floats(0.01, 0.95), st.floats(0.0, 1.0))
    def test_uniform_is_a_fixed_point(self, t, frac):
        x = frac * (1 - t)
        assert limit_quantile(LimitLaw(UNIFORM, t), x) == pytest.approx(x, abs=1e-15)

    @given(st.floats(0.01, 0.95), st.floats(0.0, 1.0))
    def test_point_mass(self, t, frac):
        x = frac * (1 - t)
        assert limit_quantile(LimitLaw(Dirac(1.0), t), x) == pytest.approx(x / (x + t), rel=1e-14)

    def test_origin(self):
        assert limit_quantile(LimitLaw(Dirac(1.0), 0.3), 0.0) == 0.0

    @pytest.mark.parametrize("x", [-0.01, 0.71])
    def test_outside_range(self, x):
        with pytest.raises(DomainError):
            limit_quantile(LimitLaw(UNIFORM, 0.3), x)

    def test_nondecreasing(self):
        law = LimitLaw(PiecewiseLinearCDF([[0.2, 0.0], [0.5, 0.6], [2.0, 1.0]]), 0.4)
        x = np.linspace(0, 0.6, 2001)
        assert np.all(np.diff(limit_quantile(law, x)) >= 0)

    @pytest.mark.parametrize("t", [-0.1, 1.0])
    def test_bad_t(self, t):
        with pytest.raises(DomainError):
            LimitLaw(UNIFORM, t)


class TestLimitCdf:
    def test_uniform(self):
        assert limit_cdf(LimitLaw(UNIFORM, 0.3), 0.5) == pytest.approx(0.5, abs=1e-13)

    def test_point_mass(self):
        # inverting x / (x + t) gives t y / (1 - y)
        assert limit_cdf(LimitLaw(Dirac(1.0), 0.5), 0.25) == pytest.approx(1 / 6, abs=1e-13)
        y = np.linspace(0, 1 / 3, 50)
        np.testing.assert_allclose(limit_cdf(LimitLaw(Dirac(1.0), 0.5), y), 0.5 * y / (1 - y), atol=1e-13)

    def test_origin(self):
        assert limit_cdf(LimitLaw(UNIFORM, 0.5), 0.0) == 0.0

    @pytest.mark.parametrize("t", [0.1, 0.5, 0.8])
    def test_lost_mass(self, t):
        law = LimitLaw(PowerLaw(2.0, 1.5), t)
        assert limit_cdf(law, 1.5 * (1 - t) + 1e-9) == pytest.approx(1 - t)
        assert limit_probability_cdf(law, 10.0) == pytest.approx(1.0)

    @given(st.floats(0.05, 0.9), st.floats(0.0, 1.0))
    def test_inverse_of_quantile(self, t, frac):
        law = LimitLaw(PowerLaw(3.0), t)
        x = frac * (1 - t)
        assert limit_cdf(law, limit_quantile(law, x)) == pytest.approx(x, abs=1e-12)


class TestPredictedRadii:
    def test_first_index_vanishes(self):
        law = LimitLaw(UNIFORM, 0.5)
        assert predicted_radii(law, np.linspace(0.1, 1, 10), 5)[0] == 0.0

    def test_plugged_in(self):
        law = LimitLaw(UNIFORM, 0.5)
        r = np.linspace(0.01, 1.0, 100)
        assert predicted_radii(law, r, 50)[49] == pytest.approx(49 / 99, rel=1e-14)

    @pytest.mark.parametrize("ell", [0, 10])
    def test_cycles_out_of_range(self, ell):
        with pytest.raises(DomainError):
            predicted_radii(LimitLaw(UNIFORM, 0.5), np.linspace(0.1, 1, 10), ell)

    def test_split(self):
        assert split_derivative_count(12, 5) == (3, 3)
        assert split_derivative_count(10, 5) == (2, 0)
        for k in range(1, 40):
            ell, q = split_derivative_count(k, 7)
            assert ell * 7 - q == k and 0 <= q <= 6


class TestEnvelope:
    def test_params(self):
        p = EnvelopeParams(64, 4096, 0.5)
        assert p.eps_n == pytest.approx(3 * 64 * math.log(64) / 4096)
        etas = [p.eta(j) for j in range(4, 65)]
        assert np.all(np.diff(etas) < 0)
        with pytest.raises(DomainError):
            p.eta(3)

    def _case(self):
        law = LimitLaw(UNIFORM, 0.5)
        r = (np.arange(1, 33) - 0.5) / 32
        return law, r, predicted_radii(law, r, 16)

    def test_exact_prediction_is_inside(self):
        law, r, pred = self._case()
        recs = envelope_check(pred, law, r, 32, 1024, 16)
        assert [rec.inside for rec in recs[:3]] == [None, None, None]
        assert all(rec.inside for rec in recs[3:])

    def test_outside_flagged(self):
        law, r, pred = self._case()
        p = EnvelopeParams(32, 1024, 0.5)
        obs = pred.copy()
        obs[9] *= math.exp(2 * p.eta(10))
        recs = envelope_check(obs, law, r, 32, 1024, 16)
        assert [rec.j for rec in recs if rec.inside is False] == [10]

    def test_shape_mismatch(self):
        law, r, pred = self._case()
        with pytest.raises(DomainError):
            envelope_check(pred[:-1], law, r, 32, 1024, 16)

    @pytest.mark.slow
    def test_desk_run_inside(self):
        from rootflow.harness import config_from_dict, run_radial

        rec = run_radial(config_from_dict({"experiment": "radial", "n": 64, "m": 65536, "t": 0.5})).records[0]
        assert rec["envelope_pass_fraction"] == 1.0


class TestResiduals:
    @pytest.mark.parametrize("t", [0.25, 0.5])
    @pytest.mark.parametrize("c", [0.2, 0.5, 0.8])
    def test_uniform_fixed_point(self, t, c):
        x = c * (1 - t)
        assert abs(pde_residual_psi(UNIFORM, x, t)) < 10 * 1e-4**2
        assert abs(pde_residual_density(UNIFORM, x, t)) < 10 * 1e-3**2

    def test_second_order(self):
        mu = PowerLaw(2.0)
        r1 = abs(pde_residual_psi(mu, 0.3, 0.25, 1e-3))
        r2 = abs(pde_residual_psi(mu, 0.3, 0.25, 1e-4))
        assert math.log(r1 / r2) / math.log(10) == pytest.approx(2.0, abs=0.2)

    def test_density_residual_shrinks(self):
        mu = PowerLaw(2.0)
        r = [abs(pde_residual_density(mu, 0.3, 0.25, h)) for h in (4e-3, 2e-3, 1e-3)]
        assert r[0] > r[1] > r[2]

    def test_atoms_rejected(self):
        with pytest.raises(DomainError):
            pde_residual_psi(Dirac(1.0), 0.2, 0.5)

    @pytest.mark.parametrize("x", [0.005, 0.5])
    def test_band_edges(self, x):
        with pytest.raises(DomainError):
            pde_residual_density(UNIFORM, x, 0.5)


class TestSampling:
    def test_point_mass_pair(self):
        t = 0.4
        v = np.array([t + 0.25 * (1 - t), t + 0.75 * (1 - t)])
        np.testing.assert_allclose(sample_limit_law(LimitLaw(Dirac(1.0), t), 2).points, 1 - t / v)

    def test_time_zero_is_base(self):
        mu = PowerLaw(0.5)
        pts = sample_limit_law(LimitLaw(mu, 0.0), 100).points
        np.testing.assert_allclose(pts, mu.quantile((np.arange(1, 101) - 0.5) / 100))

    def test_stratified_quantiles(self):
        law = LimitLaw(UNIFORM, 0.5)
        count = 4000
        pts = sample_limit_law(law, count).points
        levels = (np.arange(1, count + 1) - 0.5) / count
        # the nu_t quantile at level a is the (1 - t) nu_t quantile at (1 - t) a
        assert np.max(np.abs(pts - limit_quantile(law, 0.5 * levels))) < 2 / count

    def test_seeded(self):
        law = LimitLaw(UNIFORM, 0.5)
        a = sample_limit_law(law, 50, seed=3).points
        np.testing.assert_array_equal(a, sample_limit_law(law, 50, seed=3).points)
        assert not np.array_equal(a, sample_limit_law(law, 50, seed=4).points)

    def test_count(self):
        with pytest.raises(DomainError):
            sample_limit_law(LimitLaw(UNIFORM, 0.5), 0)
