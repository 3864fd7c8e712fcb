import math

import numpy as np
import pytest

from czpulse import presets, zz_strength
from czpulse.errors import DispersiveError, SingularityError
from czpulse.model import TWO_PI, effective_coupling
from czpulse.perturbation import (
    nu_of,
    zeta2_direct,
    zeta_fourth_order_generic,
    zeta_simplified,
)

ALPHA_Q = TWO_PI * -0.25
ALPHA_C = TWO_PI * -0.30


class TestOrders:
    def test_first_order_vanishes(self, fig2_spec6):
        res = zeta_fourth_order_generic(fig2_spec6, 7.87)
        assert res.zeta_orders[0] == 0.0

    def test_zeta2_matches_transcribed_closed_form(self):
        spec = presets.standard_circuit(6, rho_1c=0.0, rho_2c=0.0, rho_12=0.003)
        res = zeta_fourth_order_generic(spec, 7.5)
        w1, w2 = TWO_PI * 6.0, TWO_PI * 5.4
        g12 = 0.003 * math.sqrt(w1 * w2)
        oracle = zeta2_direct(g12, w1 - w2, w1 + w2, ALPHA_Q, ALPHA_Q)
        assert abs(res.zeta_orders[1] - oracle) <= 1e-12 * abs(oracle)

    def test_zero_couplings(self):
        spec = presets.standard_circuit(4, rho_1c=0.0, rho_2c=0.0, rho_12=0.0)
        res = zeta_fourth_order_generic(spec, 7.5)
        assert res.zeta_total == 0.0


class TestSimplified:
    def test_common_point(self):
        # g~ = alpha_q nu lands on (8 alpha_c + 4 alpha_q) nu^2 for any detuning
        nu = 2.0e-3
        for d12 in (TWO_PI * 0.15, TWO_PI * 0.6, TWO_PI * 0.8):
            z = zeta_simplified(d12, ALPHA_Q, ALPHA_Q, ALPHA_C, ALPHA_Q * nu, nu)
            assert z == pytest.approx((8 * ALPHA_C + 4 * ALPHA_Q) * nu**2, rel=1e-12)

    def test_zero_couplings(self):
        assert zeta_simplified(TWO_PI * 0.6, ALPHA_Q, ALPHA_Q, ALPHA_C, 0.0, 0.0) == 0.0

    def test_opposite_anharmonicity_kills_quadratic_term(self):
        # with alpha_1 = -alpha_2 the g~^2 coefficient vanishes: zeta is
        # linear in g~, so the second difference is zero
        d12 = TWO_PI * 0.6
        nu = 1.5e-3
        zs = [zeta_simplified(d12, ALPHA_Q, -ALPHA_Q, ALPHA_C, g, nu)
              for g in (0.0, 0.01, 0.02)]
        assert zs[2] - 2 * zs[1] + zs[0] == pytest.approx(0.0, abs=1e-15)

    def test_equal_alpha_quadratic_form_identity(self):
        # general two-line expression equals the quadratic form at equal alpha
        d12, nu, g = TWO_PI * 0.6, 1.5e-3, 0.02
        general = zeta_simplified(d12, ALPHA_Q, ALPHA_Q, ALPHA_C, g, nu)
        quad = (4 * ALPHA_Q / (d12**2 - ALPHA_Q**2) * (g - ALPHA_Q * nu) ** 2
                + 4 * (2 * ALPHA_C + ALPHA_Q) * nu**2)
        assert general == pytest.approx(quad, rel=1e-12)

    def test_resonant_denominator_raises(self):
        with pytest.raises(SingularityError):
            zeta_simplified(-ALPHA_Q, ALPHA_Q, ALPHA_Q, ALPHA_C, 0.01, 1e-3)


class TestDispersiveAgreement:
    def test_generic_vs_exact(self):
        # |Delta_ic| >= 8 g_ic throughout
        for wc in (7.2, 7.9, 8.6):
            for g12 in (0.004, 0.010):
                spec = presets.circuit_from_g(6.0, 5.4, wc, 0.120, 0.100, g12, levels=6)
                z_p = zeta_fourth_order_generic(spec, wc).zeta_total
                z_e = zz_strength(spec, wc)
                assert abs(z_p - z_e) <= 0.25 * abs(z_e)

    def test_simplified_vs_exact(self):
        for wc in (7.2, 7.9, 8.6):
            spec = presets.circuit_from_g(6.0, 5.4, wc, 0.120, 0.100, 0.008, levels=6)
            z_s = zeta_simplified(TWO_PI * 0.6, ALPHA_Q, ALPHA_Q, ALPHA_C,
                                  effective_coupling(spec, wc), nu_of(spec, wc))
            z_e = zz_strength(spec, wc)
            assert abs(z_s - z_e) <= 0.40 * abs(z_e)

    def test_parabola_fit_quality(self):
        # zeta(g~) from diagonalization fits a quadratic with R^2 > 0.99
        wc = 7.7
        g12s = np.linspace(0.0, 0.016, 13)
        ge, ze = [], []
        for g12 in g12s:
            spec = presets.circuit_from_g(6.0, 5.4, wc, 0.120, 0.100, g12, levels=5)
            ge.append(effective_coupling(spec, wc))
            ze.append(zz_strength(spec, wc))
        ge, ze = np.array(ge), np.array(ze)
        coef = np.polyfit(ge, ze, 2)
        resid = ze - np.polyval(coef, ge)
        r2 = 1 - np.sum(resid**2) / np.sum((ze - ze.mean()) ** 2)
        assert r2 > 0.99
        assert coef[0] < 0  # large detuning opens downward

    def test_opening_flips_with_detuning(self):
        # upward for Delta_12 < |alpha_q|, downward above
        for d12_ghz, expect_up in ((0.15, True), (0.60, False)):
            wc = 7.7
            ge, ze = [], []
            for g12 in np.linspace(0.0, 0.016, 9):
                spec = presets.circuit_from_g(6.0, 6.0 - d12_ghz, wc, 0.120, 0.100,
                                              g12, levels=5)
                ge.append(effective_coupling(spec, wc))
                ze.append(zz_strength(spec, wc))
            coef = np.polyfit(ge, ze, 2)
            assert (coef[0] > 0) == expect_up

    def test_dispersive_guard(self):
        spec = presets.standard_circuit(5)
        with pytest.raises(DispersiveError):
            zeta_fourth_order_generic(spec, 6.2)
