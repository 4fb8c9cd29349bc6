import numpy as np
import pytest

from fracalign.budget import (
    LowPassVacuumError,
    budget_residual,
    commutator_decomposition_report,
    compute_budget,
    besov_diagnostics,
    default_q_sweep,
    eps_q,
    eps_q_lowpassed_fields_rate,
    eps_q_rate,
    flux,
    onsager_convergence_study,
    scale_energy,
    u_ratio,
)
from fracalign.diagnostics import spectral_dissipation, trapezoid_cumulative
from fracalign.dynamics import SimConfig, State, evolve
from fracalign.spectral import Field, TorusGrid, dealiased_product, lp_low


def make_state(grid, u_fn, rho_fn, alpha=1.0):
    return State(Field.from_function(grid, u_fn), Field.from_function(grid, rho_fn), 0.0, alpha)


def band_limited_state(grid, seed=0, kmax=5, alpha=1.0):
    rng = np.random.default_rng(seed)
    x = grid.nodes
    u = np.zeros_like(x)
    rho = np.ones_like(x)
    for k in range(1, kmax + 1):
        a, b = rng.standard_normal(2) / k ** 2
        u += a * np.sin(k * x) + b * np.cos(k * x)
        c, d = rng.standard_normal(2) / k ** 2
        rho += 0.2 * (c * np.sin(k * x) + d * np.cos(k * x))
    return State(Field(grid, u), Field(grid, rho), 0.0, alpha)


class TestURatio:
    def test_constant_density_passes_through(self, grid256):
        s = band_limited_state(grid256, 1)
        s = State(s.u, Field.constant(grid256, 1.0), 0.0, 1.0)
        for Q in (1, 3, 5):
            U = u_ratio(s, Q)
            expect = lp_low(s.u, Q)
            assert np.max(np.abs(U.samples - expect.samples)) < 1e-13

    def test_full_band_recovers_velocity(self, grid256):
        s = band_limited_state(grid256, 2)
        U = u_ratio(s, grid256.max_block)
        assert np.max(np.abs(U.samples - s.u.samples)) < 1e-12

    def test_constant_velocity_invariant(self, grid256):
        s = make_state(grid256, lambda x: 0.8 + 0.0 * x, lambda x: 1.0 + 0.4 * np.cos(x))
        for Q in (0, 2, 4):
            U = u_ratio(s, Q)
            assert np.max(np.abs(U.samples - 0.8)) < 1e-13

    def test_lowpass_vacuum_raises(self, grid256):
        # positive spike with triangular spectrum: a sharp truncation rings
        # negative, which must abort the budget at that cutoff
        x = grid256.nodes
        m = 24
        fejer = np.ones_like(x)
        for k in range(1, m + 1):
            fejer += 2.0 * (1 - k / (m + 1)) * np.cos(k * x)
        rho = Field(grid256, 0.01 + fejer)
        assert float(np.min(rho.samples)) > 0.0
        s = State(Field.constant(grid256, 0.0), rho, 0.0, 1.0)
        with pytest.raises(LowPassVacuumError) as err:
            u_ratio(s, 2)
        assert err.value.Q == 2


class TestScaleEnergy:
    def test_full_band_matches_total(self, grid256):
        s = band_limited_state(grid256, 3)
        total = 0.5 * dealiased_product(s.rho, s.u, s.u).quadrature()
        assert scale_energy(s, grid256.max_block) == pytest.approx(total, rel=1e-12)

    def test_single_block_cos(self, grid256):
        s = make_state(grid256, np.cos, lambda x: 1.0 + 0.0 * x)
        for Q in (0, 3, 6):
            assert scale_energy(s, Q) == pytest.approx(np.pi / 2.0, rel=1e-12)

    def test_monotone_approach(self, grid256):
        s = band_limited_state(grid256, 4, kmax=20)
        total = 0.5 * dealiased_product(s.rho, s.u, s.u).quadrature()
        gaps = [abs(scale_energy(s, Q) - total) for Q in range(1, grid256.max_block + 1)]
        assert all(b <= a + 1e-14 for a, b in zip(gaps, gaps[1:]))


class TestFlux:
    def test_constant_velocity_zero(self, grid256):
        s = make_state(grid256, lambda x: 0.6 + 0.0 * x, lambda x: 1.0 + 0.4 * np.cos(x))
        for Q in (0, 2, 5):
            assert abs(flux(s, Q)) < 1e-13

    def test_full_band_band_limited_zero(self, grid256):
        s = band_limited_state(grid256, 5, kmax=4)
        assert abs(flux(s, grid256.max_block)) < 1e-10

    def test_against_mode_convolution_oracle(self):
        # brute-force convolution of mode arrays at n = 64, constant density
        grid = TorusGrid(64)
        s = band_limited_state(grid, 6, kmax=8)
        s = State(s.u, Field.constant(grid, 1.0), 0.0, 1.0)
        Q = 2
        cutoff = 2 ** (Q + 1)
        n = grid.n_points
        k = grid.wavenumbers.astype(int)
        uh = s.u.modes

        def conv(a, b):
            out = np.zeros(n, dtype=complex)
            for i in range(n):
                for j in range(n):
                    ks = k[i] + k[j]
                    if abs(ks) <= n // 2:
                        idx = ks % n
                        out[idx] += a[i] * b[j]
            return out

        low = np.where(np.abs(k) < cutoff, 1.0, 0.0)
        u2h = conv(uh, uh)
        # F_Q = (u^2)_Q - u_Q u_Q for rho = 1
        fq_modes = low * u2h - conv(low * uh, low * uh)
        fq_oracle = np.fft.ifft(fq_modes * n).real
        U = u_ratio(s, Q)
        m_Q = lp_low(dealiased_product(s.rho, s.u), Q)
        fq_impl = lp_low(dealiased_product(s.u, s.u), Q).samples - U.samples * m_Q.samples
        assert np.max(np.abs(fq_impl - fq_oracle)) < 1e-12
        pi_oracle = grid.node_spacing * np.sum(fq_oracle * U.derivative().samples)
        assert flux(s, Q) == pytest.approx(pi_oracle, abs=1e-12)


class TestEpsQ:
    def test_constant_velocity_zero(self, grid256):
        s = make_state(grid256, lambda x: 0.7 + 0.0 * x, lambda x: 1.0 + 0.3 * np.cos(x))
        for Q in (0, 3, 6):
            assert abs(eps_q_rate(s, Q)) < 1e-12

    def test_full_band_matches_total_dissipation(self, grid256):
        s = band_limited_state(grid256, 7, kmax=6)
        rate = eps_q_rate(s, grid256.max_block)
        assert rate == pytest.approx(0.5 * spectral_dissipation(s), rel=1e-10)

    def test_sign_trend_on_smooth_run(self, smooth_decay_short):
        for Q in (1, 3, 5):
            series = eps_q(smooth_decay_short, Q)
            assert np.min(series) > -1e-8

    def test_lowpassed_ordering_agrees_at_full_band(self, grid256):
        s = band_limited_state(grid256, 8, kmax=6)
        a = eps_q_rate(s, grid256.max_block)
        b = eps_q_lowpassed_fields_rate(s, grid256.max_block)
        assert a == pytest.approx(b, rel=1e-9)


class TestBudgetResidual:
    def test_stationary_flock_zero(self):
        config = SimConfig(n_points=64, t_end=1.0, output_interval=0.05,
                           initial_data="stationary",
                           initial_params={"u_const": 0.5, "rho_const": 1.0})
        traj = evolve(config)
        for tb in compute_budget(traj):
            assert np.max(np.abs(tb.residual)) < 1e-12

    def test_smooth_run_closes_for_every_q(self, smooth_decay_short):
        tables = compute_budget(smooth_decay_short)
        assert [tb.Q for tb in tables] == default_q_sweep(256)
        for tb in tables:
            assert np.max(np.abs(tb.residual)) < 1e-5, tb.Q

    def test_full_band_reduces_to_energy_law(self, smooth_decay_short):
        from fracalign.diagnostics import energy_residual

        res_full = budget_residual(smooth_decay_short, smooth_decay_short.states[0].grid.max_block)
        res_energy = energy_residual(smooth_decay_short)
        # same normalization, same trapezoid integrals: the two residuals agree
        assert np.max(np.abs(res_full - res_energy)) < 2e-6

    def test_residual_refines_with_stride(self):
        worst = []
        for interval in (0.01, 0.005):
            config = SimConfig(n_points=128, alpha=1.0, t_end=0.5, cfl_number=0.3,
                               output_interval=interval, initial_data="smooth_decay")
            traj = evolve(config)
            worst.append(max(np.max(np.abs(tb.residual)) for tb in compute_budget(traj, [2])))
        assert worst[1] < worst[0] / 3.0


class TestConvergenceStudy:
    def test_stationary_all_zero(self):
        config = SimConfig(n_points=64, t_end=0.5, output_interval=0.05,
                           initial_data="stationary",
                           initial_params={"u_const": 0.5, "rho_const": 1.0})
        study = onsager_convergence_study(evolve(config))
        assert np.max(study.flux_magnitudes) < 1e-14
        assert np.max(study.eps_gaps) < 1e-14
        assert study.flux_vanishes and study.eps_converges

    def test_smooth_run_decays(self, smooth_decay_short):
        study = onsager_convergence_study(smooth_decay_short)
        assert study.flux_vanishes
        assert study.eps_converges
        assert study.flux_decay_factor >= 10.0
        assert study.eps_decay_factor >= 10.0
        assert study.flux_slope < 0.0

    def test_besov_diagnostics_shape(self, smooth_decay_short):
        diag = besov_diagnostics(smooth_decay_short)
        nblocks = smooth_decay_short.states[0].grid.max_block + 2
        assert len(diag["q"]) == nblocks
        assert np.all(np.isfinite(diag["d13_u"]))
        assert np.all(diag["dtilde_rho"] >= 0.0)


class TestCommutatorDecomposition:
    def test_remainder_reported_and_bounded(self, grid256):
        s = band_limited_state(grid256, 9, kmax=30)
        for Q in (2, 4):
            rep = commutator_decomposition_report(s, Q)
            assert rep.bounded
            assert rep.remainder_norm >= 0.0
            assert set(rep.term_norms) == {
                "low_commutator_sq", "high_triple", "cross", "rho_velocity_comm"}
