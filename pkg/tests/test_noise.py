import math

import numpy as np
import pytest

from czpulse import presets
from czpulse.errors import ConfigError
from czpulse.model import TWO_PI
from czpulse.noise import (
    NoiseSpec,
    dephasing_error_from_covariance,
    dephasing_error_from_integrals,
    dephasing_rates,
    longitudinal_rates,
    phase_covariance,
    rate_curves,
    rb_error,
    rb_states,
    table1_states_and_errors,
    transverse_rates,
)
from czpulse.pulse import awp_generate, calibrate_conditional_phase, netzero

IDLE = presets.FIG2_IDLE

FIG7_NOISE = NoiseSpec(t1_us=(20.0, 10.0, 20.0), flux_a_uphi0sq=100.0)


@pytest.fixture(scope="module")
def pulse30(fig2_spec5, omap5):
    lam = calibrate_conditional_phase(fig2_spec5, 30.0, (1.0,), IDLE, math.pi, omap=omap5)
    return awp_generate(fig2_spec5, 30.0, lam, IDLE, omap=omap5)


class TestTransverse:
    def test_isolated_qubit_rate_is_one_over_t1(self):
        spec = presets.standard_circuit(4, rho_1c=0.0, rho_2c=0.0, rho_12=0.0)
        noise = NoiseSpec(t1_us=(20.0, 10.0, 20.0))
        entries = transverse_rates(spec, noise, 7.5)
        r = {(e.source, e.target): e.rate for e in entries}
        assert r[("10", "00")] == pytest.approx(1.0 / (20.0 * 1e3), rel=1e-9)
        assert r[("01", "00")] == pytest.approx(1.0 / (20.0 * 1e3), rel=1e-9)

    def test_ss_dominates_leakage(self, fig2_spec6):
        # transition rates within S sit far above the leakage rates
        for wc in (6.2, 7.0, 8.0):
            entries = transverse_rates(fig2_spec6, FIG7_NOISE, wc)
            ss = sum(e.rate for e in entries if e.target != "leak")
            sl = sum(e.rate for e in entries if e.target == "leak")
            assert ss > 100.0 * sl

    def test_near_resonance_coupler_participation(self, fig2_spec6):
        def gss(wc):
            return sum(e.rate for e in transverse_rates(fig2_spec6, FIG7_NOISE, wc)
                       if e.target != "leak")
        assert gss(6.1) > gss(8.2)  # shorter-T1 coupler participates near resonance


class TestLongitudinal:
    def test_zero_couplings_no_rates(self):
        spec = presets.standard_circuit(4, rho_1c=0.0, rho_2c=0.0, rho_12=0.0)
        entries = longitudinal_rates(spec, FIG7_NOISE, 7.5)
        assert sum(e.rate for e in entries) < 1e-20

    def test_linear_in_amplitude(self, fig2_spec6):
        n1 = NoiseSpec(t1_us=(20, 10, 20), flux_a_uphi0sq=100.0)
        n2 = NoiseSpec(t1_us=(20, 10, 20), flux_a_uphi0sq=200.0)
        r1 = sum(e.rate for e in longitudinal_rates(fig2_spec6, n1, 6.3))
        r2 = sum(e.rate for e in longitudinal_rates(fig2_spec6, n2, 6.3))
        assert r2 == pytest.approx(2.0 * r1, rel=1e-9)

    def test_below_transverse(self, fig2_spec6):
        for wc in (6.1, 6.5):
            lon = sum(e.rate for e in longitudinal_rates(fig2_spec6, FIG7_NOISE, wc)
                      if e.target != "leak")
            tra = sum(e.rate for e in transverse_rates(fig2_spec6, FIG7_NOISE, wc)
                      if e.target != "leak")
            assert lon < tra


class TestDephasing:
    def test_sweet_spot_zero(self, fig2_spec6):
        noise = NoiseSpec(t1_us=(20, 10, 20), flux_a_uphi0sq=100.0, sigma_uphi0=60.0)
        rates = dephasing_rates(fig2_spec6, noise, 8.2)
        assert all(v == 0.0 for v in rates.values())

    def test_near_resonance_hierarchy(self, fig2_spec6):
        noise = NoiseSpec(t1_us=(20, 10, 20), flux_a_uphi0sq=100.0, sigma_uphi0=60.0)
        rates = dephasing_rates(fig2_spec6, noise, 5.9)
        # |101> overlaps |020>^0 whose slope is nearly doubled
        assert abs(rates["11"]) > abs(rates["10"])
        # exceeds 1e6 s^-1 = 1e-3 1/ns in the near-resonance regime
        assert abs(rates["11"]) > 1e-3
        assert abs(rates["10"]) > 1e-3

    def test_sigma_derived_from_one_over_f(self):
        noise = NoiseSpec(t1_us=(20,), flux_a_uphi0sq=100.0)
        # sigma^2 = 2 A ln(w_uv / w_ir)
        expected = math.sqrt(2 * 100e-12 * math.log(1e7 / 0.01))
        assert noise.sigma_phi0 == pytest.approx(expected, rel=1e-12)
        assert noise.sigma_phi0 * 1e6 == pytest.approx(64.4, abs=0.5)


class TestCovariance:
    def test_quasistatic_rank_one(self, fig2_spec5, omap5, pulse30):
        noise = NoiseSpec(t1_us=(20, 10, 20), flux_a_uphi0sq=100.0, sigma_uphi0=60.0)
        cov = phase_covariance(fig2_spec5, noise, pulse30, "quasistatic", omap=omap5)
        eig = np.linalg.eigvalsh(cov.matrix)
        assert eig[-1] > 0
        assert np.all(np.abs(eig[:-1]) < 1e-12 * eig[-1])

    def test_one_over_f_reduces_to_quasistatic_for_unipolar(self, fig2_spec5, omap5, pulse30):
        noise = NoiseSpec(t1_us=(20, 10, 20), flux_a_uphi0sq=100.0)
        c_f = phase_covariance(fig2_spec5, noise, pulse30, "one_over_f", omap=omap5)
        c_q = phase_covariance(fig2_spec5, noise, pulse30, "quasistatic", omap=omap5)
        assert np.allclose(c_f.matrix, c_q.matrix, rtol=0.05)

    def test_white_matches_monte_carlo(self, fig2_spec5, omap5, pulse30):
        a_white = 1e-9  # Phi0^2 ns
        noise = NoiseSpec(t1_us=(20, 10, 20), white_flux_psd=a_white)
        cov = phase_covariance(fig2_spec5, noise, pulse30, "white", omap=omap5).matrix
        # Monte-Carlo oracle: discrete white flux noise, same sensitivities
        from czpulse.noise import _sensitivities
        sens = _sensitivities(fig2_spec5, pulse30, omap5)
        keys = ("01", "10", "11")
        p = np.stack([sens[k] for k in keys])
        dt = pulse30.dt
        rng = np.random.default_rng(1234)
        n_real = 5000
        x = rng.standard_normal((n_real, p.shape[1])) * math.sqrt(a_white / dt)
        phis = x @ p.T * dt
        mc = phis.T @ phis / n_real
        scale = np.sqrt(np.outer(np.diag(cov), np.diag(cov)))
        assert np.max(np.abs(mc - cov) / scale) < 0.05

    def test_netzero_dc_suppression(self, fig2_spec5):
        from czpulse import operating_map
        noise = NoiseSpec(t1_us=(20, 10, 20), flux_a_uphi0sq=100.0)
        omap_nz = operating_map(fig2_spec5, 8.2)
        lam = calibrate_conditional_phase(fig2_spec5, 40.0, (1.0,), 8.2, math.pi,
                                          omap=omap_nz, kind="netzero")
        p_nz = netzero(fig2_spec5, 20.0, lam, 8.2, omap=omap_nz)
        cov_nz = phase_covariance(fig2_spec5, noise, p_nz, "one_over_f", omap=omap_nz)
        from czpulse import operating_map as om_factory
        omap_uni = om_factory(fig2_spec5, IDLE)
        lam_u = calibrate_conditional_phase(fig2_spec5, 40.0, (1.0,), IDLE, math.pi,
                                            omap=omap_uni)
        p_u = awp_generate(fig2_spec5, 40.0, lam_u, IDLE, omap=omap_uni)
        cov_u = phase_covariance(fig2_spec5, noise, p_u, "one_over_f", omap=omap_uni)
        f0_nz = abs(cov_nz.spectra["11"][0]) ** 2
        f0_u = abs(cov_u.spectra["11"][0]) ** 2
        assert f0_nz < 1e-3 * f0_u

    def test_unknown_kind(self, fig2_spec5, omap5, pulse30):
        noise = NoiseSpec(t1_us=(20, 10, 20), flux_a_uphi0sq=100.0)
        with pytest.raises(ConfigError):
            phase_covariance(fig2_spec5, noise, pulse30, "pink", omap=omap5)


class TestRBAlgebra:
    def test_state_counts(self):
        states = rb_states()
        assert len(states) == 60
        for psi in states:
            assert np.linalg.norm(psi) == pytest.approx(1.0, abs=1e-12)

    def test_first_row_all_zero(self):
        rng = np.random.default_rng(7)
        g = rng.uniform(0.1, 1.0, 9)
        cov = rng.standard_normal((3, 3))
        cov = cov @ cov.T
        res = table1_states_and_errors(
            {"01": g[0], "10": g[1], "11": g[2]},
            {("01", "00"): g[3], ("10", "00"): g[4], ("11", "10"): g[5],
             ("11", "01"): g[6], ("01", "10"): g[7], ("10", "01"): g[8]},
            cov, tau=1.0)
        assert np.all(res.per_state[0] == 0.0)  # |00> row

    def test_bruteforce_average_matches_closed_forms(self):
        rng = np.random.default_rng(11)
        for _ in range(5):
            g = rng.uniform(0.1, 1.0, 9)
            cov = rng.standard_normal((3, 3))
            cov = cov @ cov.T
            res = table1_states_and_errors(
                {"01": g[0], "10": g[1], "11": g[2]},
                {("01", "00"): g[3], ("10", "00"): g[4], ("11", "10"): g[5],
                 ("11", "01"): g[6], ("01", "10"): g[7], ("10", "01"): g[8]},
                cov, tau=0.7)
            assert res.avg_leakage == pytest.approx(res.closed_leakage, rel=1e-12)
            assert res.avg_intra == pytest.approx(res.closed_intra, rel=1e-12)
            assert res.avg_dephasing == pytest.approx(res.closed_dephasing, rel=1e-12)

    def test_uniform_leakage_three_quarters(self):
        g = 0.3
        res = table1_states_and_errors(
            {"01": g, "10": g, "11": g}, {}, np.zeros((3, 3)), tau=1.0)
        assert res.avg_leakage == pytest.approx(3 * g / 4.0, rel=1e-12)

    def test_eq13_recovered_from_eq12_rank_one(self):
        rng = np.random.default_rng(3)
        for _ in range(10):
            eps = rng.standard_normal(3)
            cov = 2.0 * np.outer(eps, eps)
            assert dephasing_error_from_covariance(cov) == pytest.approx(
                dephasing_error_from_integrals(eps), rel=1e-12, abs=1e-15)

    def test_verbatim_32row_discrepancy_reported(self):
        res = table1_states_and_errors(
            {"01": 0.1, "10": 0.1, "11": 0.1},
            {("11", "10"): 0.1, ("11", "01"): 0.1}, np.zeros((3, 3)), tau=1.0)
        pairs = {p for p, _v, _d in res.verbatim_discrepancies}
        assert pairs == {("11", "10"), ("11", "01")}


class TestRBError:
    def test_zero_noise(self, fig2_spec5, omap5, pulse30):
        noise = NoiseSpec(t1_us=(1e9, 1e9, 1e9), flux_a_uphi0sq=0.0, sigma_uphi0=0.0)
        bd = rb_error(fig2_spec5, noise, pulse30, omap=omap5)
        assert bd.eps_tr < 1e-10
        assert bd.eps_ph == 0.0

    def test_fig7_transitional_dominates(self, fig2_spec5, omap5, pulse30):
        bd = rb_error(fig2_spec5, FIG7_NOISE, pulse30, omap=omap5)
        assert bd.eps_tr > bd.eps_ph
        assert 1e-4 < bd.eps_tr < 1e-2

    def test_rate_curves_clamp_flag(self, fig2_spec6):
        curves = rate_curves(fig2_spec6, FIG7_NOISE, np.linspace(6.0, 7.0, 11))
        assert curves.clamped.dtype == bool
