import numpy as np
import pytest

from fracalign.dynamics import (
    SimConfig,
    SolverError,
    State,
    compute_derived,
    evolve,
    rhs,
    step,
)
from fracalign.forcing import time_bump_force, trig_force, zero_force
from fracalign.initial_data import VacuumError, make_initial_data, mollify
from fracalign.spectral import Field, TorusGrid, dealiased_product


def make_state(grid, u_fn, rho_fn, alpha=1.0, t=0.0):
    return State(Field.from_function(grid, u_fn), Field.from_function(grid, rho_fn), t, alpha)


class TestDerived:
    def test_zero_velocity_constant_density(self, grid64):
        s = make_state(grid64, lambda x: 0.0 * x, lambda x: 1.0 + 0.0 * x)
        d = compute_derived(s)
        assert d.e.inf_norm() < 1e-14
        assert d.q.inf_norm() < 1e-14

    def test_sin_velocity_constant_density(self, grid64):
        s = make_state(grid64, np.sin, lambda x: 1.0 + 0.0 * x)
        d = compute_derived(s)
        assert np.max(np.abs(d.e.samples - np.cos(grid64.nodes))) < 1e-12

    def test_multiplier_route(self, grid256):
        # rho = 1 + cos/2 at alpha 1: e = -pi/2 cos when u = 0
        s = make_state(grid256, lambda x: 0.0 * x, lambda x: 1.0 + 0.5 * np.cos(x))
        d = compute_derived(s)
        expect = -(np.pi / 2.0) * np.cos(grid256.nodes)  # C(1) * 0.5 from the oracle
        assert np.max(np.abs(d.e.samples - expect)) < 1e-10

    def test_q_times_rho_recovers_e(self, grid256):
        s = make_state(grid256, np.sin, lambda x: 1.0 + 0.5 * np.cos(x))
        d = compute_derived(s)
        assert np.max(np.abs(d.q.samples * s.rho.samples - d.e.samples)) < 1e-10

    def test_e_prime_identity(self, grid256):
        # e' = rho^2 (q'/rho) + q rho' holds pointwise for smooth states
        s = make_state(grid256, np.sin, lambda x: 1.0 + 0.5 * np.cos(x))
        d = compute_derived(s)
        lhs = d.e.derivative().samples
        rho = s.rho.samples
        rhs_ = rho ** 2 * d.q_prime_over_rho.samples + d.q.samples * s.rho.derivative().samples
        assert np.max(np.abs(lhs - rhs_)) < 1e-8

    def test_vacuum_rejected(self, grid64):
        s = make_state(grid64, np.sin, lambda x: 0.5 * np.cos(x))  # touches negative
        with pytest.raises(VacuumError):
            compute_derived(s)


class TestRhs:
    def test_stationary_flock_is_exact_fixed_point(self, grid64):
        s = make_state(grid64, lambda x: 0.5 + 0.0 * x, lambda x: 1.0 + 0.0 * x)
        du, drho = rhs(s, zero_force())
        assert du.inf_norm() == 0.0
        assert drho.inf_norm() == 0.0

    def test_zero_velocity_any_density(self, grid64):
        s = make_state(grid64, lambda x: 0.0 * x, lambda x: 1.0 + 0.3 * np.sin(x))
        du, drho = rhs(s, zero_force())
        assert drho.inf_norm() < 1e-14
        # u = 0 kills transport and the velocity equation entirely
        assert du.inf_norm() < 1e-14

    def test_e_form_cross_check(self, grid256):
        rng = np.random.default_rng(17)
        u = np.zeros(256)
        rho = np.ones(256)
        x = grid256.nodes
        for k in range(1, 6):
            a, b = rng.standard_normal(2) / k ** 2
            u += a * np.sin(k * x) + b * np.cos(k * x)
            c, d_ = rng.standard_normal(2) / k ** 2
            rho += 0.2 * (c * np.sin(k * x) + d_ * np.cos(k * x))
        s = State(Field(grid256, u), Field(grid256, rho), 0.0, 1.2)
        du, _ = rhs(s, zero_force())
        derived = compute_derived(s)
        m = dealiased_product(s.rho, s.u)
        alt = -dealiased_product(s.u, derived.e) - m.frac_laplacian(1.2)
        assert np.max(np.abs(du.samples - alt.samples)) < 1e-8

    def test_three_term_form(self, grid256):
        s = make_state(grid256, np.sin, lambda x: 1.0 + 0.5 * np.cos(x), alpha=0.7)
        du, _ = rhs(s, zero_force())
        u, rho = s.u, s.rho
        m = dealiased_product(rho, u)
        explicit = (-dealiased_product(u, u.derivative())
                    - m.frac_laplacian(0.7)
                    + dealiased_product(u, rho.frac_laplacian(0.7)))
        assert np.max(np.abs(du.samples - explicit.samples)) < 1e-12


class TestStep:
    def test_stationary_flock_thousand_steps(self, grid64):
        s = make_state(grid64, lambda x: 0.5 + 0.0 * x, lambda x: 1.0 + 0.0 * x)
        u0 = s.u.samples.copy()
        rho0 = s.rho.samples.copy()
        for _ in range(1000):
            s = step(s, zero_force(), dt_max=1e-3)
        assert np.array_equal(s.u.samples, u0)
        assert np.array_equal(s.rho.samples, rho0)

    def test_mass_change_one_step(self, grid256):
        s = make_state(grid256, np.sin, lambda x: 1.0 + 0.5 * np.cos(x))
        m0 = s.mass()
        s = step(s, zero_force(), dt_max=1e-3)
        assert abs(s.mass() - m0) / m0 < 1e-13

    def test_third_order_in_time(self):
        # Richardson self-convergence against a dt/4 reference
        grid = TorusGrid(64)

        def run(dt):
            s = make_state(grid, np.sin, lambda x: 1.0 + 0.5 * np.cos(x))
            while s.t < 0.5 - 1e-12:
                # large cfl so dt_max alone controls the step size
                s = step(s, zero_force(), dt_max=min(dt, 0.5 - s.t), cfl=5.0)
            return s.u.samples

        ref = run(1.25e-4)
        errs = [np.max(np.abs(run(dt) - ref)) for dt in (2e-3, 1e-3, 5e-4)]
        ratios = [errs[i] / errs[i + 1] for i in range(2)]
        for r in ratios:
            assert 6.0 < r < 10.0, ratios

    def test_nan_detection(self, grid64):
        s = make_state(grid64, lambda x: 1e8 * np.sin(x), lambda x: 1.0 + 0.0 * x)
        with pytest.raises((SolverError, VacuumError)):
            for _ in range(50):
                s = step(s, zero_force(), dt_max=1.0, cfl=50.0)


class TestEvolve:
    def test_snapshot_times_exact(self):
        config = SimConfig(n_points=64, t_end=0.2, output_interval=0.05)
        traj = evolve(config)
        assert np.allclose(traj.times, [0.0, 0.05, 0.10, 0.15, 0.20], atol=1e-12)

    def test_vacuum_by_construction_surfaces_as_solver_error(self):
        # initial data below the positivity floor is the clean error path;
        # the dynamics itself keeps the density away from vacuum
        config = SimConfig(n_points=64, alpha=1.0, t_end=2.0, output_interval=0.1,
                           initial_data="smooth_decay",
                           initial_params={"rho_amp": 1.05, "u_amp": 1.0})
        with pytest.raises(SolverError):
            evolve(config)

    def test_conservation_over_short_run(self, smooth_decay_short):
        traj = smooth_decay_short
        mass = np.array([s.mass() for s, _ in traj])
        mom = np.array([dealiased_product(s.rho, s.u).quadrature() for s, _ in traj])
        e_mean = np.array([d.e.quadrature() for _, d in traj])
        assert np.max(np.abs(mass - mass[0])) / mass[0] < 1e-11
        assert np.max(np.abs(mom - mom[0])) < 1e-11
        assert np.max(np.abs(e_mean - e_mean[0])) < 1e-9

    def test_q_max_principle_unforced(self, smooth_decay_short):
        qmax = np.array([d.q.inf_norm() for _, d in smooth_decay_short])
        assert np.max(np.diff(qmax)) < 1e-8
        qmin = np.array([np.min(d.q.samples) for _, d in smooth_decay_short])
        assert np.min(np.diff(qmin)) > -1e-8

    def test_velocity_sup_non_increasing_unforced(self, smooth_decay_short):
        umax = np.array([s.u.inf_norm() for s, _ in smooth_decay_short])
        assert np.max(np.diff(umax)) < 1e-8

    def test_forced_velocity_bound(self):
        force = trig_force(amplitude=0.3, mode=1, omega=2.0)
        config = SimConfig(n_points=64, alpha=1.0, t_end=1.0, output_interval=0.02,
                           force_name="trig",
                           force_params={"amplitude": 0.3, "mode": 1, "omega": 2.0})
        traj = evolve(config)
        u0 = traj.states[0].u.inf_norm()
        for s, _ in traj:
            assert s.u.inf_norm() <= u0 + s.t * force.sup_f + 1e-8

    def test_compatibility_cross_check(self):
        config = SimConfig(n_points=128, alpha=1.0, t_end=0.5, output_interval=0.01,
                           evolve_e_cross_check=True, cfl_number=0.3)
        traj = evolve(config)
        worst = max(
            float(np.max(np.abs(s.e_evolved.samples - d.e.samples))) for s, d in traj
        )
        assert worst < 1e-8


class TestForceSpec:
    def test_spatial_derivative_consistency(self, grid256):
        for force in (time_bump_force(0.4, 2, 0.5, 0.5), trig_force(0.3, 3, 1.5)):
            t = 0.4
            f = Field(grid256, np.asarray(force.f(grid256.nodes, t), float))
            fx = np.asarray(force.f_x(grid256.nodes, t), float)
            assert np.max(np.abs(f.derivative().samples - fx)) < 1e-8
            fxx = np.asarray(force.f_xx(grid256.nodes, t), float)
            assert np.max(np.abs(f.derivative().derivative().samples - fxx)) < 1e-8

    def test_compact_support(self, grid64):
        force = time_bump_force(1.0, 1, center=0.5, width=0.5)
        assert force.support_end == pytest.approx(1.0)
        assert np.max(np.abs(force.f(grid64.nodes, 1.0))) == 0.0
        assert np.max(np.abs(force.f(grid64.nodes, 2.0))) == 0.0
        assert np.max(np.abs(force.f(grid64.nodes, 0.5))) == pytest.approx(1.0)

    def test_sup_norms(self):
        force = time_bump_force(0.4, 2, 0.5, 0.5)
        assert force.sup_f == pytest.approx(0.4)
        assert force.sup_f_prime == pytest.approx(0.8)


class TestInitialData:
    def test_smooth_entry_matches_derived(self, grid256):
        u0, rho0, e0 = make_initial_data(grid256, 1.0, "smooth_decay")
        s = State(u0, rho0, 0.0, 1.0)
        d = compute_derived(s)
        assert np.max(np.abs(e0.samples - d.e.samples)) == 0.0

    def test_steep_tanh_respects_floor(self):
        grid = TorusGrid(512)
        u0, rho0, e0 = make_initial_data(grid, 1.0, "steep_tanh",
                                         {"amp": 0.5, "width": 0.05})
        assert float(np.min(rho0.samples)) >= 0.4

    def test_floor_violation_raises(self, grid64):
        with pytest.raises(VacuumError):
            make_initial_data(grid64, 1.0, "stationary", {"rho_const": 1e-5})

    def test_compatibility_residual(self, grid256):
        u0, rho0, e0 = make_initial_data(grid256, 0.7, "steep_tanh",
                                         {"amp": 0.4, "width": 0.1})
        resid = u0.derivative() - rho0.frac_laplacian(0.7) - e0
        assert resid.inf_norm() < 1e-10

    def test_random_modes_seeded(self, grid64):
        a = make_initial_data(grid64, 1.0, "random_modes", seed=42)
        b = make_initial_data(grid64, 1.0, "random_modes", seed=42)
        assert np.array_equal(a[0].samples, b[0].samples)
        c = make_initial_data(grid64, 1.0, "random_modes", seed=43)
        assert not np.array_equal(a[0].samples, c[0].samples)

    def test_unknown_recipe(self, grid64):
        with pytest.raises(ValueError):
            make_initial_data(grid64, 1.0, "no_such_recipe")


class TestMollify:
    def test_zero_width_is_identity(self, grid256):
        f = Field.from_function(grid256, np.sin)
        assert mollify(f, 0.0) is f

    def test_constant_preserved(self, grid256):
        f = Field.constant(grid256, 2.5)
        out = mollify(f, 0.3)
        assert np.max(np.abs(out.samples - 2.5)) < 1e-13

    def test_mass_preserved(self, grid256):
        f = Field.from_function(grid256, lambda x: 1.0 + 0.5 * np.cos(x))
        out = mollify(f, 0.4)
        assert out.quadrature() == pytest.approx(f.quadrature(), rel=1e-13)

    def test_sup_distance_decreases_with_width(self, grid256):
        f = Field.from_function(grid256, lambda x: np.sin(x) + 0.3 * np.cos(3 * x))
        dists = []
        for j in range(1, 5):
            eps = 2.0 ** (-j)
            dists.append(float(np.max(np.abs(mollify(f, eps).samples - f.samples))))
        assert all(b < a for a, b in zip(dists, dists[1:]))

    def test_negative_width_rejected(self, grid256):
        with pytest.raises(ValueError):
            mollify(Field.constant(grid256, 1.0), -0.1)
