"""Circle companion model: spectra, damping form, long-horizon bounds."""

from math import pi, sqrt

import numpy as np
import pytest

import beachlab.linear_circle as lc
from beachlab.errors import ConfigError, NegativeCutoff, NonFiniteField


def random_state(n_modes, seed, amp=1.0):
    rng = np.random.default_rng(seed)
    count = 2 * n_modes + 1
    return lc.SpectralState.from_physical(
        amp * rng.standard_normal(count), amp * rng.standard_normal(count)
    )


class TestSpectralState:
    def test_physical_round_trip(self):
        st = random_state(16, 0)
        eta, psi = st.to_physical()
        again = lc.SpectralState.from_physical(eta, psi)
        assert np.allclose(again.eta_hat, st.eta_hat, atol=1e-13)
        assert np.allclose(again.psi_hat, st.psi_hat, atol=1e-13)

    def test_elevation_mean_projected(self):
        x = lc.collocation_nodes(8)
        st = lc.SpectralState.from_physical(0.3 + np.cos(x), np.zeros_like(x))
        assert st.eta_hat[0] == 0.0
        eta, _ = st.to_physical()
        assert abs(np.mean(eta)) < 1e-14

    def test_psi_mean_kept(self):
        x = lc.collocation_nodes(8)
        st = lc.SpectralState.from_physical(np.cos(x), 0.7 + np.sin(x))
        assert abs(st.psi_hat[0] - 0.7) < 1e-14

    def test_direct_construction_rejects_eta_mean(self):
        coeffs = np.zeros(9, dtype=complex)
        coeffs[0] = 0.2
        with pytest.raises(ConfigError):
            lc.SpectralState(coeffs, np.zeros(9, dtype=complex), 4)

    def test_length_mismatch_rejected(self):
        with pytest.raises(ConfigError):
            lc.SpectralState(np.zeros(9, dtype=complex),
                             np.zeros(7, dtype=complex), 4)

    def test_even_sample_count_rejected(self):
        with pytest.raises(ConfigError):
            lc.SpectralState.from_physical(np.zeros(8), np.zeros(8))

    def test_non_finite_rejected(self):
        bad = np.zeros(9, dtype=complex)
        bad[3] = np.nan
        with pytest.raises(NonFiniteField):
            lc.SpectralState(np.zeros(9, dtype=complex), bad, 4)

    def test_single_mode_is_cosine(self):
        st = lc.SpectralState.single_mode(12, 5, eta_amp=0.3, psi_amp=0.1)
        eta, psi = st.to_physical()
        x = lc.collocation_nodes(12)
        assert np.allclose(eta, 0.3 * np.cos(5 * x), atol=1e-14)
        assert np.allclose(psi, 0.1 * np.cos(5 * x), atol=1e-14)

    def test_single_mode_range_checked(self):
        with pytest.raises(ConfigError):
            lc.SpectralState.single_mode(8, 0)
        with pytest.raises(ConfigError):
            lc.SpectralState.single_mode(8, 9)


class TestMultiplier:
    def test_unknown_op_rejected(self):
        with pytest.raises(ConfigError):
            lc.multiplier("laplace", random_state(8, 1))

    def test_sqrt_twice_is_abs(self):
        st = random_state(16, 2)
        twice = lc.multiplier("sqrt_abs_D", lc.multiplier("sqrt_abs_D", st))
        once = lc.multiplier("abs_D", st)
        assert np.allclose(twice.eta_hat, once.eta_hat, rtol=1e-14,
                           atol=1e-16)
        assert np.allclose(twice.psi_hat, once.psi_hat, rtol=1e-14,
                           atol=1e-16)

    def test_abs_d_on_cosine(self):
        st = lc.SpectralState.single_mode(16, 7, eta_amp=1.0)
        out = lc.multiplier("abs_D", st)
        eta, _ = out.to_physical()
        x = lc.collocation_nodes(16)
        assert np.allclose(eta, 7.0 * np.cos(7 * x), atol=1e-12)

    def test_inv_dx_is_zero_mean_antiderivative(self):
        st = lc.SpectralState.single_mode(16, 3, eta_amp=1.0)
        out = lc.multiplier("inv_dx", st)
        eta, _ = out.to_physical()
        x = lc.collocation_nodes(16)
        assert np.allclose(eta, np.sin(3 * x) / 3.0, atol=1e-13)

    def test_inv_dx_drops_constant_mode(self):
        x = lc.collocation_nodes(8)
        st = lc.SpectralState.from_physical(np.cos(x), 5.0 + 0.0 * x)
        out = lc.multiplier("inv_dx", st)
        assert abs(out.psi_hat[0]) == 0.0


class TestSymmetrize:
    def test_round_trip(self):
        st = random_state(12, 3)
        u, psi_mean = lc.symmetrize(st)
        back = lc.desymmetrize(u, psi_mean)
        assert np.allclose(back.eta_hat, st.eta_hat, atol=1e-14)
        assert np.allclose(back.psi_hat, st.psi_hat, atol=1e-14)

    def test_theta_l2_is_homogeneous_half_norm(self):
        st = lc.SpectralState.single_mode(8, 3, psi_amp=0.7)
        u, _ = lc.symmetrize(st)
        theta_l2 = sqrt(float(np.real(np.vdot(u.theta_hat, u.theta_hat))))
        n = lc.mode_numbers(8).astype(float)
        hom = sqrt(float(np.sum(np.abs(n) * np.abs(st.psi_hat) ** 2)))
        assert abs(theta_l2 - hom) < 1e-14


class TestDamping:
    def test_uniform_cutoff_reduces_to_multiplier(self):
        st = random_state(16, 4, amp=0.1)
        damped = lc.apply_damping(st, np.ones(33))
        du, _ = lc.symmetrize(damped)
        u, _ = lc.symmetrize(st)
        n = lc.mode_numbers(16).astype(float)
        expect = np.zeros_like(u.theta_hat)
        expect[1:] = u.theta_hat[1:] / np.abs(n[1:])
        assert np.max(np.abs(du.theta_hat - expect)) < 1e-15

    def test_zero_cutoff_gives_zero(self):
        damped = lc.apply_damping(random_state(16, 5), np.zeros(33))
        assert np.all(damped.psi_hat == 0.0)
        assert np.all(damped.eta_hat == 0.0)

    def test_negative_sample_rejected(self):
        chi = np.ones(33)
        chi[7] = -1e-9
        with pytest.raises(NegativeCutoff):
            lc.apply_damping(random_state(16, 6), chi)

    def test_wrong_grid_rejected(self):
        with pytest.raises(ConfigError):
            lc.apply_damping(random_state(16, 7), np.ones(32))

    def test_form_nonnegative_many_states(self):
        chi = lc.circle_cutoff(16, plateau=0.8, ramp=0.9)
        for seed in range(100):
            q = lc.damping_form(random_state(16, seed), chi)
            assert q >= -1e-15

    def test_form_matches_operator_pairing(self):
        # (P u, u) computed two ways: quadratic form vs apply then pair
        st = random_state(16, 8, amp=0.5)
        chi = lc.circle_cutoff(16, plateau=0.5, ramp=1.0)
        q = lc.damping_form(st, chi)
        damped = lc.apply_damping(st, chi)
        du, _ = lc.symmetrize(damped)
        u, _ = lc.symmetrize(st)
        paired = float(np.real(np.vdot(u.theta_hat, du.theta_hat)))
        assert abs(q - paired) < 1e-13 * max(abs(q), 1e-30)

    def test_skew_part_orthogonal(self):
        for seed in range(5):
            st = random_state(16, 20 + seed)
            le, lt = lc.skew_part(st)
            u, _ = lc.symmetrize(st)
            lu_u = float(np.real(np.vdot(u.eta_hat, le))
                         + np.real(np.vdot(u.theta_hat, lt)))
            scale = float(np.real(np.vdot(u.eta_hat, u.eta_hat))
                          + np.real(np.vdot(u.theta_hat, u.theta_hat)))
            assert abs(lu_u) < 1e-12 * scale


class TestCutoffBuilder:
    def test_even_about_center(self):
        chi = lc.circle_cutoff(32, plateau=0.7, ramp=0.8)
        x = lc.collocation_nodes(32)
        # chi(2 pi - x) = chi(x): compare against reversed samples
        assert np.allclose(chi[1:], chi[1:][::-1], atol=1e-14)
        assert chi[0] == 0.0
        assert abs(chi[np.argmin(np.abs(x - pi))] - 1.0) < 1e-14

    def test_support_bounds_checked(self):
        with pytest.raises(ConfigError):
            lc.circle_cutoff(16, plateau=2.0, ramp=1.5)
        with pytest.raises(ConfigError):
            lc.circle_cutoff(16, plateau=0.5, ramp=0.0)


class TestEvolve:
    def test_stability_guard(self):
        st = lc.SpectralState.single_mode(64, 1, eta_amp=0.1)
        with pytest.raises(ConfigError):
            lc.evolve_circle(st, np.zeros(129), 0.2, 1.0)

    def test_bad_dt_rejected(self):
        st = lc.SpectralState.single_mode(8, 1, eta_amp=0.1)
        with pytest.raises(ConfigError):
            lc.evolve_circle(st, np.zeros(17), 0.0, 1.0)

    def test_bad_regularity_rejected_up_front(self):
        st = lc.SpectralState.single_mode(8, 1, eta_amp=0.1)
        with pytest.raises(ConfigError):
            lc.evolve_circle(st, np.zeros(17), 0.05, 1.0, s_values=(0.3,))

    def test_zero_horizon_single_record(self):
        st = lc.SpectralState.single_mode(8, 2, eta_amp=0.1)
        h = lc.evolve_circle(st, np.zeros(17), 0.05, 0.0)
        assert h.times.shape == (1,)
        assert h.l2[0] > 0

    def test_single_mode_period_return(self):
        # mode n oscillates at frequency sqrt(n): after 2 pi / sqrt(n)
        # the state comes back to itself
        st = lc.SpectralState.single_mode(64, 4, eta_amp=0.01)
        period = 2.0 * pi / sqrt(4.0)
        h = lc.evolve_circle(st, np.zeros(129), period / 512, period,
                             s_values=(0.0,))
        e0, p0 = st.to_physical()
        e1, p1 = h.final_state.to_physical()
        assert np.max(np.abs(e1 - e0)) < 1e-12
        assert np.max(np.abs(p1 - p0)) < 1e-10
        assert abs(h.l2[-1] - h.l2[0]) < 1e-12

    def test_undamped_l2_constant(self):
        # RK4 contracts the fastest mode by (dt sqrt(N))^6 / 144 per
        # step, so the drift bound tracks the step size
        st = random_state(32, 9, amp=0.1)
        h = lc.evolve_circle(st, np.zeros(65), 0.004, 10.0, s_values=(0.0,))
        assert np.max(np.abs(h.l2 - h.l2[0])) < 1e-8 * h.l2[0]
        assert np.all(np.diff(h.l2) <= 0.0)

    def test_damped_l2_monotone(self):
        chi = lc.circle_cutoff(32, plateau=0.8, ramp=0.9)
        st = lc.SpectralState.single_mode(32, 2, eta_amp=0.05, psi_amp=0.03)
        h = lc.evolve_circle(st, chi, 0.05, 20.0, s_values=(0.0,))
        assert np.all(np.diff(h.l2) <= 1e-14)
        assert h.l2[-1] < 0.5 * h.l2[0]

    def test_energy_law_per_step(self):
        # d/dt |u|^2 = -2 (P u, u): Simpson-paired per-step residual is
        # O(dt^5) per pair; measured 1.0e-10 at dt = 0.05 shrinking x31
        # under halving
        chi = lc.circle_cutoff(32, plateau=0.8, ramp=0.9)
        st = lc.SpectralState.single_mode(32, 2, eta_amp=0.05, psi_amp=0.03)
        sups = {}
        for dt in (0.05, 0.025):
            h = lc.evolve_circle(st, chi, dt, 20.0, s_values=(0.0,))
            e2 = h.l2 ** 2
            q = 2.0 * h.damping_quadratic
            resid = (e2[2:] - e2[:-2]
                     + (dt / 3.0) * (q[:-2] + 4.0 * q[1:-1] + q[2:]))
            sups[dt] = np.max(np.abs(resid))
        assert sups[0.05] < 5e-10
        assert sups[0.05] / sups[0.025] > 8.0

    def test_rate_norm_never_grows(self):
        # the time derivative solves the same damped system, so its l2
        # norm is nonincreasing from the start
        chi = lc.circle_cutoff(32, plateau=1.0, ramp=0.8)
        st = random_state(32, 10, amp=0.1)
        h = lc.evolve_circle(st, chi, 0.05, 30.0, s_values=(0.0,))
        assert np.max(h.rate_l2) <= h.rate_l2[0] * (1.0 + 1e-12)

    def test_bit_identical_rerun(self):
        chi = lc.circle_cutoff(16, plateau=0.8, ramp=0.9)
        st = random_state(16, 11, amp=0.1)
        h1 = lc.evolve_circle(st, chi, 0.1, 5.0)
        h2 = lc.evolve_circle(st, chi, 0.1, 5.0)
        assert np.array_equal(h1.final_state.eta_hat, h2.final_state.eta_hat)
        assert np.array_equal(h1.final_state.psi_hat, h2.final_state.psi_hat)
        assert np.array_equal(h1.l2, h2.l2)


class TestSobolevNorm:
    def test_single_mode_unit_coefficient(self):
        # coefficients 1 on modes +-1: the conjugate pair contributes
        # sqrt(2) at s = 0
        st = lc.SpectralState.single_mode(4, 1, eta_amp=2.0)
        eta_norm, psi_norm = lc.sobolev_norm(st, 0.0)
        assert abs(eta_norm - sqrt(2.0)) < 1e-12
        assert psi_norm == 0.0

    def test_closed_form_mode_weight(self):
        # eta = a cos(n x): |eta|_{H^s}^2 = (1 + n^2)^s a^2 / 2
        st = lc.SpectralState.single_mode(8, 3, eta_amp=0.4)
        eta_norm, _ = lc.sobolev_norm(st, 1.0)
        assert abs(eta_norm - 0.4 * sqrt(10.0 / 2.0)) < 1e-12

    def test_half_norm_matches_theta(self):
        st = lc.SpectralState.single_mode(8, 5, psi_amp=0.9)
        _, psi_half = lc.sobolev_norm(st, 0.0)
        u, _ = lc.symmetrize(st)
        theta_l2 = sqrt(float(np.real(np.vdot(u.theta_hat, u.theta_hat))))
        # H^{1/2} dominates the homogeneous half norm; on a single mode
        # the two differ by the weight ratio ((1+n^2)/n^2)^{1/4}
        ratio = (26.0 / 25.0) ** 0.25
        assert abs(psi_half - ratio * theta_l2) < 1e-12

    def test_non_half_integer_rejected(self):
        st = lc.SpectralState.single_mode(4, 1, eta_amp=1.0)
        with pytest.raises(ConfigError):
            lc.sobolev_norm(st, 0.3)
        with pytest.raises(ConfigError):
            lc.sobolev_norm(st, -0.5)

    def test_history_tracks_norm_pairs(self):
        st = lc.SpectralState.single_mode(16, 2, eta_amp=0.1, psi_amp=0.05)
        h = lc.evolve_circle(st, np.zeros(33), 0.1, 0.0,
                             s_values=(0.0, 1.0))
        for s in (0.0, 1.0):
            en, pn = lc.sobolev_norm(st, s)
            assert abs(h.sobolev[s][0] - (en + pn)) < 1e-13


class TestUniformBound:
    def test_undamped_flow_is_isometric(self):
        st = random_state(32, 12, amp=0.1)
        rep = lc.uniform_bound_experiment(st, np.zeros(65),
                                          (0.0, 0.5, 1.0), 40.0)
        for s in (0.0, 0.5, 1.0):
            assert abs(rep.invariant_ratios[s] - 1.0) < 1e-12
        assert rep.rate_ratio <= 1.0 + 1e-12

    def test_damped_ratios_bounded_and_stable(self):
        chi = lc.circle_cutoff(32, plateau=1.0, ramp=0.8)
        st = random_state(32, 13, amp=0.1)
        rep1 = lc.uniform_bound_experiment(st, chi, (0.0, 0.5, 1.0), 60.0)
        rep2 = lc.uniform_bound_experiment(st, chi, (0.0, 0.5, 1.0), 120.0)
        for s in (0.0, 0.5, 1.0):
            assert 1.0 - 1e-12 <= rep1.sup_ratios[s] < 10.0
            change = (abs(rep2.sup_ratios[s] - rep1.sup_ratios[s])
                      / rep1.sup_ratios[s])
            assert change < 0.05
        assert rep1.rate_ratio <= 1.0 + 1e-12

    def test_frequency_ratios_dominate_initial(self):
        chi = lc.circle_cutoff(32, plateau=0.8, ramp=0.9)
        st = random_state(32, 14, amp=0.1)
        rep = lc.uniform_bound_experiment(st, chi, (0.0,), 30.0)
        assert rep.frequency_ratios[0] >= rep.initial_ratios[0] - 1e-12
        assert rep.frequency_ratios[1] >= rep.initial_ratios[1] - 1e-12

    def test_default_step_respects_guard(self):
        st = lc.SpectralState.single_mode(64, 3, eta_amp=0.05)
        rep = lc.uniform_bound_experiment(st, np.zeros(129), (0.0,), 5.0)
        assert rep.dt * sqrt(64.0) <= 1.0 + 1e-12
