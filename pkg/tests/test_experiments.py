import numpy as np
import pytest

from fracalign.dynamics import SimConfig
from fracalign.experiments import (
    distance_functional,
    mollification_convergence,
    uniqueness_gronwall,
)
from fracalign.dynamics import State
from fracalign.spectral import Field, TorusGrid


def base_config(**kw):
    defaults = dict(n_points=128, alpha=1.0, t_end=0.5, output_interval=0.025,
                    cfl_number=0.4, initial_data="steep_tanh",
                    initial_params={"amp": 0.5, "width": 0.15})
    defaults.update(kw)
    return SimConfig(**defaults)


class TestMollification:
    def test_input_validation(self):
        cfg = base_config()
        with pytest.raises(ValueError):
            mollification_convergence(cfg, [0.5, 0.25], [0.25])  # too few
        with pytest.raises(ValueError):
            mollification_convergence(cfg, [0.25, 0.5, 0.125], [0.25])  # not decreasing
        with pytest.raises(ValueError):
            mollification_convergence(cfg, [0.5, 0.25, 0.01], [0.25])  # below 4 dx

    def test_smooth_base_distances_tiny(self):
        cfg = base_config(initial_data="smooth_decay", initial_params={})
        rep = mollification_convergence(cfg, [0.8, 0.4, 0.2], [0.25, 0.5])
        # mollifying an analytic field barely changes it; solutions collapse
        assert np.max(rep.u_distances) < 0.05
        assert rep.cauchy_u and rep.cauchy_rho

    def test_steep_base_cauchy_trend(self):
        cfg = base_config()
        rep = mollification_convergence(cfg, [0.8, 0.4, 0.2], [0.25, 0.5])
        assert rep.cauchy_u, rep.u_distances
        assert rep.cauchy_rho, rep.rho_distances
        # contraction reported; must at least not expand
        assert np.all(rep.contraction_ratios >= 1.0)

    def test_regularization_in_time(self):
        # distances at a later time no larger than at an earlier one
        cfg = base_config()
        rep = mollification_convergence(cfg, [0.8, 0.4, 0.2], [0.125, 0.5])
        assert np.all(rep.u_distances[:, 1] <= rep.u_distances[:, 0] + 1e-13)


class TestStability:
    def test_zero_perturbation_identically_zero(self):
        rep = uniqueness_gronwall(base_config(initial_data="smooth_decay",
                                              initial_params={}), 0.0)
        assert rep.zero_identical
        assert np.max(rep.phi) == 0.0

    def test_distance_functional_symmetry(self):
        grid = TorusGrid(64)
        a = State(Field.from_function(grid, np.sin),
                  Field.from_function(grid, lambda x: 1 + 0.3 * np.cos(x)), 0.0, 1.0)
        b = State(Field.from_function(grid, lambda x: 0.9 * np.sin(x)),
                  Field.from_function(grid, lambda x: 1 + 0.25 * np.cos(x)), 0.0, 1.0)
        assert distance_functional(a, b) == pytest.approx(distance_functional(b, a), rel=1e-12)
        assert distance_functional(a, a) == 0.0

    def test_linear_response_regime(self):
        cfg = base_config(initial_data="smooth_decay", initial_params={},
                          t_end=1.0, output_interval=0.05, alpha=0.5)
        small = uniqueness_gronwall(cfg, 1e-6)
        large = uniqueness_gronwall(cfg, 1e-5)
        rs = small.phi / small.phi[0]
        rl = large.phi / large.phi[0]
        assert np.max(np.abs(rs - rl) / np.abs(rs)) < 0.05
        assert small.envelope_ok and large.envelope_ok

    def test_rate_stable_under_grid_doubling(self):
        rates = []
        for n in (128, 256):
            cfg = base_config(n_points=n, initial_data="smooth_decay",
                              initial_params={}, t_end=1.0,
                              output_interval=0.05, alpha=0.5)
            rates.append(uniqueness_gronwall(cfg, 1e-6).fitted_rate)
        assert abs(rates[1] - rates[0]) <= 0.1 * abs(rates[0]), rates
