import numpy as np
import pytest

from czpulse import diagonalize, d_factor, d_star, presets, track_adiabatic, zz_strength
from czpulse.errors import AnchorError, ConfigError
from czpulse.model import TWO_PI, apply_dh_domega_c, assemble_raw, build_basis
from czpulse.spectrum import _tracked_point


class TestDiagonalize:
    def test_diagonal_input(self):
        vals, vecs = diagonalize(np.diag([3.0, 1.0, 2.0]))
        assert np.allclose(vals, [1.0, 2.0, 3.0])
        assert np.allclose(np.abs(vecs), np.eye(3)[:, [1, 2, 0]])

    def test_two_level_gap(self):
        g, d = 0.3, 1.1
        vals, _ = diagonalize(np.array([[0.0, g], [g, d]]))
        assert vals[1] - vals[0] == pytest.approx(np.sqrt(d**2 + 4 * g**2), rel=1e-12)

    def test_fig2_residuals(self, fig2_spec6):
        h = assemble_raw(fig2_spec6, 6.1)
        vals, vecs = diagonalize(h)
        res = h @ vecs - vecs * vals[None, :]
        assert np.max(np.linalg.norm(res, axis=0)) < 1e-9
        assert np.max(np.abs(vecs.T @ vecs - np.eye(len(vals)))) < 1e-10

    def test_phase_convention(self):
        vals, vecs = diagonalize(np.array([[0.0, 0.2], [0.2, 1.0]]))
        for k in range(2):
            assert vecs[np.argmax(np.abs(vecs[:, k])), k] > 0

    def test_non_hermitian_rejected(self):
        with pytest.raises(ConfigError):
            diagonalize(np.array([[0.0, 1.0], [0.5, 0.0]]))


class TestTracking:
    labels = ((0, 0, 0), (0, 0, 1), (1, 0, 0), (1, 0, 1))

    def test_dispersive_overlap(self, fig2_spec6):
        b = build_basis(fig2_spec6)
        sg = track_adiabatic(fig2_spec6, np.linspace(8.0, 9.0, 21), self.labels)
        k = np.argmin(np.abs(sg.omega_c - 8.5))
        v101 = sg.tracked_vectors[k][:, 3]
        assert abs(v101[b.index_of((1, 0, 1))]) > 0.99

    def test_crossing_a_equal_superposition(self, fig2_spec6):
        b = build_basis(fig2_spec6)
        sg = track_adiabatic(fig2_spec6, np.linspace(5.9, 8.8, 117), self.labels)
        k = np.argmin(np.abs(sg.omega_c - 6.0))
        v101 = sg.tracked_vectors[k][:, 3]
        p_101 = abs(v101[b.index_of((1, 0, 1))])
        p_011 = abs(v101[b.index_of((0, 1, 1))])
        inv_sqrt2 = 2**-0.5
        assert p_101 == pytest.approx(inv_sqrt2, abs=0.12)
        assert p_011 == pytest.approx(inv_sqrt2, abs=0.12)

    def test_refinement_invariance(self, fig2_spec6):
        coarse = track_adiabatic(fig2_spec6, np.linspace(5.6, 8.8, 65), self.labels)
        fine = track_adiabatic(fig2_spec6, np.linspace(5.6, 8.8, 129), self.labels)
        common = np.intersect1d(coarse.omega_c, fine.omega_c)
        assert len(common) >= 65
        ic = np.searchsorted(coarse.omega_c, common)
        jf = np.searchsorted(fine.omega_c, common)
        assert np.max(np.abs(coarse.tracked_energies[ic] - fine.tracked_energies[jf])) < 1e-9

    def test_anchor_error_when_all_near_resonant(self, fig2_spec6):
        with pytest.raises(AnchorError):
            track_adiabatic(fig2_spec6, np.linspace(5.55, 6.05, 11), self.labels)

    def test_continuity_of_zeta(self, fig2_spec6):
        sg = track_adiabatic(fig2_spec6, np.linspace(5.5, 9.0, 141), self.labels)
        dz = np.abs(np.diff(sg.zeta))
        med = np.median(dz[dz > 0])
        # no isolated jumps far above the local grid-scale variation
        for k in np.nonzero(dz > 10 * med)[0]:
            neighborhood = dz[max(0, k - 3): k + 4]
            assert dz[k] < 10 * max(np.median(neighborhood), 1e-12)


class TestZZ:
    def test_zero_couplings(self):
        spec = presets.standard_circuit(4, rho_1c=0.0, rho_2c=0.0, rho_12=0.0)
        assert abs(zz_strength(spec, 7.3)) < 1e-12

    def test_magnitudes(self, fig2_spec6):
        assert abs(zz_strength(fig2_spec6, 8.7)) / TWO_PI < 5e-5  # tens of kHz
        assert abs(zz_strength(fig2_spec6, 5.6)) / TWO_PI > 0.05  # > 50 MHz

    def test_g_eff_zero_matches_min_zeta_over_g12(self):
        # one column of the residual-ZZ locus: argmin_|zeta|(g12) vs g~ = 0
        wc = 7.6
        g12_grid = np.linspace(0.0, 0.020, 41)
        zeta = []
        for g12 in g12_grid:
            spec = presets.circuit_from_g(6.0, 5.4, wc, 0.120, 0.100, g12, levels=5)
            zeta.append(abs(zz_strength(spec, wc)))
        from czpulse.model import effective_coupling
        spec0 = presets.circuit_from_g(6.0, 5.4, wc, 0.120, 0.100, 0.0, levels=5)
        root = -effective_coupling(spec0, wc) / TWO_PI
        cell = g12_grid[1] - g12_grid[0]
        assert abs(g12_grid[int(np.argmin(zeta))] - root) <= cell


class TestDFactor:
    def test_zero_couplings(self):
        spec = presets.standard_circuit(3, rho_1c=0.0, rho_2c=0.0, rho_12=0.0)
        d, flag = d_factor(spec, 7.0)
        assert d == 0.0 and not flag

    def test_matches_finite_difference(self, fig2_spec6):
        # <s'|ds/dwc> from dH/dwc versus phase-aligned FD derivative, 10 kHz step
        omega, h = 6.2, 1e-5
        labels = ((0, 0, 0), (0, 0, 1), (1, 0, 0), (1, 0, 1))
        vals0, vecs0, cols0 = _tracked_point(fig2_spec6, omega, labels)
        valsp, vecsp, colsp = _tracked_point(fig2_spec6, omega + h, labels)
        valsm, vecsm, colsm = _tracked_point(fig2_spec6, omega - h, labels)
        for pos in range(4):
            vp = vecsp[:, colsp[pos]]
            vm = vecsm[:, colsm[pos]]
            v0 = vecs0[:, cols0[pos]]
            if vp @ v0 < 0:
                vp = -vp
            if vm @ v0 < 0:
                vm = -vm
            ds = (vp - vm) / (2 * h * TWO_PI)  # per rad/ns
            dh_v = apply_dh_domega_c(fig2_spec6, omega, v0[:, None])[:, 0]
            for other in range(4):
                if other == pos:
                    continue
                col_o = cols0[other]
                analytic = (vecs0[:, col_o] @ dh_v) / (vals0[cols0[pos]] - vals0[col_o])
                fd = vecs0[:, col_o] @ ds
                assert analytic == pytest.approx(fd, rel=0.01, abs=1e-8)

    def test_d_star_single_point(self, fig2_spec6):
        ds, _ = d_star(fig2_spec6, 7.87, 7.87 + 1e-9, n=2)
        d, _ = d_factor(fig2_spec6, 7.87)
        assert ds == pytest.approx(d, rel=1e-6)

    def test_d_star_monotone(self, fig2_spec6):
        points = [7.5, 7.0, 6.5, 6.0]
        values = [d_star(fig2_spec6, w, 7.87, n=80)[0] for w in points]
        assert all(b >= a - 1e-12 for a, b in zip(values, values[1:]))


class TestOperatingMap:
    def test_spline_matches_direct(self, omap6, fig2_spec6):
        for w in (5.6, 6.3, 7.1, 7.8):
            assert float(omap6.zeta(w)) == pytest.approx(zz_strength(fig2_spec6, w), rel=1e-4)
            d_direct, _ = d_factor(fig2_spec6, w)
            assert float(omap6.d(w)) == pytest.approx(d_direct, rel=0.01)

    def test_floor_excludes_zeta_turnover(self, omap6):
        z = np.abs(omap6.grid.zeta)
        k_idle = np.argmin(np.abs(omap6.grid.omega_c - 7.87))
        assert np.all(np.diff(z[: k_idle + 1]) <= 1e-6)  # |zeta| monotone below idle

    def test_d_star_running_max(self, omap6):
        assert omap6.d_star(5.6) >= omap6.d_star(7.0) >= omap6.d_star(7.8)
