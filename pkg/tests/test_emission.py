import math
import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate as sint

from decohere.constants import C, HBAR, KB
from decohere.emission import (
    EmissionDomainError,
    EmissionModel,
    ParticleModel,
    analytic_cooling,
    cool,
    cooling_parameter,
    energy_loss_rate,
    load_spectrum,
    spectral_rate,
    total_rate,
    write_spectrum,
)
from decohere.presets import AEROSOL_AREA, AEROSOL_MASS

A = AEROSOL_AREA


def particle(T=1000.0, cv=12000.0, area=A):
    return ParticleModel.from_kb(area, cv, AEROSOL_MASS, T)


def greybody(T=1000.0, cv=12000.0, area=A):
    return EmissionModel.greybody(particle(T, cv, area))


def flat_table(model, n=64, w_max=2e16):
    w = np.linspace(0.0, w_max, n)
    return EmissionModel.tabulated(model.particle, w, np.full(n, model.particle.effective_area / 4))


class TestParticleModel:
    @pytest.mark.parametrize("field", ["effective_area", "heat_capacity", "mass", "initial_temperature"])
    def test_rejects_nonpositive(self, field):
        kw = dict(effective_area=A, heat_capacity=1.0, mass=1.0, initial_temperature=300.0)
        kw[field] = 0.0
        with pytest.raises(ValueError):
            ParticleModel(**kw)

    def test_infinite_heat_capacity_allowed(self):
        p = particle(cv=math.inf)
        assert not p.cools and math.isinf(p.heat_capacity_kb)

    def test_small_heat_capacity_warns(self):
        with pytest.warns(UserWarning):
            particle(cv=10.0)

    def test_from_kb(self):
        assert particle(cv=12000.0).heat_capacity == pytest.approx(12000.0 * KB, rel=1e-15)


class TestEmissionModel:
    def test_tabulated_needs_increasing(self):
        with pytest.raises(ValueError):
            EmissionModel.tabulated(particle(), [1.0, 1.0], [0.0, 1.0])

    def test_tabulated_needs_nonnegative(self):
        with pytest.raises(ValueError):
            EmissionModel.tabulated(particle(), [1.0, 2.0], [0.0, -1.0])

    def test_unknown_kind(self):
        with pytest.raises(ValueError):
            EmissionModel(particle(), "blackbody")

    def test_area_clamped_outside_table(self):
        m = EmissionModel.tabulated(particle(), [1e14, 2e14], [1e-18, 3e-18])
        assert m.area(5e13) == 0.0 and m.area(3e14) == 0.0
        assert m.area(1.5e14) == pytest.approx(8e-18)


class TestSpectralRate:
    def test_zero_frequency(self):
        assert spectral_rate(greybody(), 0.0, 500.0) == 0.0

    def test_boltzmann_factor(self):
        m = greybody(cv=math.inf)
        T = 800.0
        w = KB * T / HBAR
        assert spectral_rate(m, w, T) / (A * w * w / (2 * math.pi * C) ** 2) == pytest.approx(0.36787944117144233,
                                                                                           rel=1e-14)

    def test_log_domain_agreement(self):
        m = greybody()
        T, w = 1000.0, 1e14
        u = HBAR * w / (KB * T)
        log_value = math.log(A) + 2 * math.log(w) - 2 * math.log(2 * math.pi * C) - u - 0.5 * u * u / 12000.0
        assert spectral_rate(m, w, T) == pytest.approx(math.exp(log_value), rel=1e-12)
        assert spectral_rate(m, w, T) == pytest.approx(6.564990139482629e-09, rel=1e-12)

    @pytest.mark.parametrize("w, T", [(-1.0, 300.0), (1e14, 0.0), (1e14, -5.0)])
    def test_domain(self, w, T):
        with pytest.raises(EmissionDomainError):
            spectral_rate(greybody(), w, T)

    @given(st.floats(1e11, 1e16), st.floats(10.0, 5000.0), st.floats(1.001, 3.0))
    def test_increasing_in_temperature(self, w, T, factor):
        m = greybody(cv=math.inf)
        lo, hi = spectral_rate(m, w, T), spectral_rate(m, w, factor * T)
        assert hi >= lo >= 0


class TestTotalRate:
    def test_closed_form(self):
        m = greybody(cv=math.inf)
        expected = 2 * A * (KB * 1000.0 / HBAR) ** 3 / (2 * math.pi * C) ** 2
        assert total_rate(m, 1000.0) == pytest.approx(expected, rel=1e-14)
        assert total_rate(m, 1000.0) == pytest.approx(6324412.993247744, rel=1e-12)

    def test_cubic_scaling(self):
        m = greybody(cv=math.inf)
        assert total_rate(m, 1000.0) / total_rate(m, 500.0) == pytest.approx(8.0, rel=1e-13)

    def test_finite_heat_capacity_quadrature(self):
        m = greybody(cv=300.0)
        T = 700.0
        ref, _ = sint.quad(lambda w: float(spectral_rate(m, w, T)), 0, 50 * KB * T / HBAR, epsabs=0, epsrel=1e-12,
                           limit=200)
        assert total_rate(m, T) == pytest.approx(ref, rel=1e-9)

    def test_dark_table(self):
        m = EmissionModel.tabulated(particle(), [1e13, 1e15], [0.0, 0.0])
        assert total_rate(m, 1000.0) == 0.0
        assert energy_loss_rate(m, 1000.0) == 0.0

    def test_monotone_in_temperature(self):
        m = greybody()
        temps = [100.0, 300.0, 1000.0, 3000.0]
        assert np.all(np.diff([total_rate(m, T) for T in temps]) > 0)
        assert np.all(np.diff([energy_loss_rate(m, T) for T in temps]) > 0)

    def test_flat_table_matches_greybody(self):
        m = greybody(cv=5000.0)
        t = flat_table(m)
        for T in (300.0, 1000.0, 2500.0):
            assert total_rate(t, T) == pytest.approx(total_rate(m, T), rel=1e-9)
            assert energy_loss_rate(t, T) == pytest.approx(energy_loss_rate(m, T), rel=1e-9)


class TestEnergyLoss:
    def test_quartic_scaling(self):
        m = greybody(cv=math.inf)
        assert energy_loss_rate(m, 2000.0) / energy_loss_rate(m, 1000.0) == pytest.approx(16.0, rel=1e-9)

    def test_heat_capacity_suppresses(self):
        assert energy_loss_rate(greybody(), 1000.0) < energy_loss_rate(greybody(cv=math.inf), 1000.0)

    def test_stefan_boltzmann_like_closed_form(self):
        # 6 A hbar (kT/hbar)^4 / (2 pi c)^2 for C_V = inf
        m = greybody(cv=math.inf)
        expected = 6 * A * HBAR * (KB * 1000.0 / HBAR) ** 4 / (2 * math.pi * C) ** 2
        assert energy_loss_rate(m, 1000.0) == pytest.approx(expected, rel=1e-13)


class TestCooling:
    def test_infinite_heat_capacity_constant(self):
        traj = cool(greybody(cv=math.inf), 1.0)
        assert traj(0.5) == 1000.0 and traj.final_temperature == 1000.0

    def test_zero_span(self):
        traj = cool(greybody(), 0.0)
        assert traj.t.size == 1 and traj.initial_temperature == 1000.0

    def test_matches_analytic_at_grid(self):
        m = greybody()
        t = np.linspace(0.0, 0.01, 20)
        traj = cool(m, 0.01)
        assert np.max(np.abs(traj(t) / analytic_cooling(m.particle, t) - 1)) < 5e-3

    def test_pinned_value(self):
        # T0 = 1000 K after 10 ms for the aerosol particle
        p = particle()
        assert analytic_cooling(p, 0.01) == pytest.approx(274.4125754697454, rel=1e-12)
        assert cool(greybody(), 0.01)(0.01) == pytest.approx(274.4125754697454, rel=5e-3)

    def test_monotone(self):
        traj = cool(greybody(T=3000.0), 0.1)
        assert np.all(np.diff(traj(np.linspace(0, 0.1, 200))) <= 0)

    def test_energy_bookkeeping(self):
        m = greybody(T=2000.0)
        tau = 1e-3
        traj = cool(m, tau)
        radiated, _ = sint.quad(lambda t: energy_loss_rate(m, float(traj(t))), 0, tau, epsrel=1e-10, limit=200)
        released = m.particle.heat_capacity * (2000.0 - traj.final_temperature)
        assert released == pytest.approx(radiated, rel=1e-7)

    def test_tabulated_cooling_matches_greybody(self):
        m = greybody(T=2000.0)
        t = flat_table(m)
        assert cool(t, 1e-3).final_temperature == pytest.approx(cool(m, 1e-3).final_temperature, rel=1e-6)

    def test_analytic_needs_finite_heat_capacity(self):
        with pytest.raises(ValueError):
            analytic_cooling(particle(cv=math.inf), 1.0)

    def test_analytic_t0(self):
        assert analytic_cooling(particle(), 0.0) == 1000.0

    def test_analytic_cube_root_tail(self):
        p = particle()
        assert analytic_cooling(p, 800.0) / analytic_cooling(p, 100.0) == pytest.approx(0.5, rel=0.01)

    def test_cooling_parameter_expansion(self):
        # the heat-capacity factor 1 - 10/x + 105/x^2 enters linearly
        p = particle(cv=1000.0)
        ratio = cooling_parameter(p) * p.heat_capacity / (cooling_parameter(particle(cv=1e12)) * 1e12 * KB)
        F = lambda x: 1 - 10 / x + 105 / x**2
        assert ratio == pytest.approx(F(1000.0) / F(1e12), rel=1e-12)

    @given(st.floats(1000.0, 1e5), st.floats(300.0, 5000.0))
    def test_ode_vs_analytic_while_above_half(self, cv, T0):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            m = greybody(T=T0, cv=cv)
        p = m.particle
        # time at which the analytic law reaches T0 / 2
        t_half = 7.0 / (T0**3 * cooling_parameter(p))
        t = np.linspace(0.0, t_half, 12)
        numeric = cool(m, t_half)(t)
        assert np.max(np.abs(numeric / analytic_cooling(p, t) - 1)) <= 5e-3


class TestSpectrumFile:
    def test_round_trip(self, tmp_path):
        w = np.array([1e13, 2e14, 3e15])
        s = np.array([0.0, 1.5e-19, 2e-19])
        path = tmp_path / "s.csv"
        write_spectrum(path, w, s, comment="test spectrum")
        w2, s2 = load_spectrum(path)
        assert np.array_equal(w, w2) and np.array_equal(s, s2)

    def test_missing_header(self, tmp_path):
        path = tmp_path / "s.csv"
        path.write_text("1,2\n3,4\n")
        with pytest.raises(ValueError, match="header"):
            load_spectrum(path)

    def test_not_increasing(self, tmp_path):
        path = tmp_path / "s.csv"
        path.write_text("omega_rad_per_s,sigma_abs_m2\n2,1\n1,1\n")
        with pytest.raises(ValueError, match="increasing"):
            load_spectrum(path)

    def test_model_from_file(self, tmp_path):
        m = greybody()
        path = tmp_path / "flat.csv"
        t = flat_table(m)
        write_spectrum(path, t.omega_table, t.sigma_table)
        fm = EmissionModel.from_spectrum_file(m.particle, path)
        assert total_rate(fm, 900.0) == pytest.approx(total_rate(m, 900.0), rel=1e-9)
