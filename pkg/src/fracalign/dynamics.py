"""State, right-hand side, and time integration of the alignment system.

The evolved unknowns are the velocity u and the density rho on a periodic
grid, with dynamics

    u_t + u u' = -L_a(rho u) + u L_a rho + f,       rho_t + (rho u)' = 0,

where L_a is the fractional dissipation operator of order alpha.  All
pointwise products on the right-hand side are dealiased.  The derived
quantities e = u' - L_a rho and q = e / rho are computed spectrally from
each state; an optional cross-check mode evolves e by its own conservation
law e_t + (u e)' = f' and lets diagnostics compare the two routes.

Time integration is the three-stage strong-stability-preserving Runge-Kutta
scheme with a CFL-limited step covering both the advective scale dx/|u| and
the stiff dissipative scale 1/(C(alpha) k_max^alpha max rho).
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from typing import Callable

import numpy as np

from .forcing import ForceSpec, zero_force
from .initial_data import VacuumError, make_initial_data
from .kernel import frac_multiplier_constant
from .spectral import Field, TorusGrid, dealiased_product

__all__ = [
    "State",
    "DerivedFields",
    "SimConfig",
    "Trajectory",
    "SolverError",
    "compute_derived",
    "rhs",
    "step",
    "evolve",
]

VACUUM_FLOOR = 1e-8


class SolverError(RuntimeError):
    """Time integration failed; carries the failing time."""

    def __init__(self, message: str, t: float):
        super().__init__(f"{message} (t = {t:.6g})")
        self.t = t


@dataclass
class State:
    """The pair (u, rho) at time t, plus the dissipation order alpha."""

    u: Field
    rho: Field
    t: float
    alpha: float
    e_evolved: Field | None = None  # cross-check copy of e, when enabled

    @property
    def grid(self) -> TorusGrid:
        return self.u.grid

    def mass(self) -> float:
        return self.rho.quadrature()

    def rho_min(self) -> float:
        return float(np.min(self.rho.samples))

    def check_valid(self):
        if self.rho_min() <= VACUUM_FLOOR:
            raise VacuumError(
                f"density reached the vacuum guard: min rho = {self.rho_min():.3e} at t = {self.t:.6g}"
            )


@dataclass
class DerivedFields:
    e: Field
    q: Field
    q_prime: Field
    q_prime_over_rho: Field


def compute_derived(state: State) -> DerivedFields:
    """e = u' - L_a rho and the transported ratios q, q', q'/rho."""
    state.check_valid()
    e = state.u.derivative() - state.rho.frac_laplacian(state.alpha)
    q = Field(state.grid, e.samples / state.rho.samples)
    q_prime = q.derivative()
    qpr = Field(state.grid, q_prime.samples / state.rho.samples)
    return DerivedFields(e=e, q=q, q_prime=q_prime, q_prime_over_rho=qpr)


def _force_field(grid: TorusGrid, force: ForceSpec, t: float) -> np.ndarray | None:
    if force.is_zero:
        return None
    return np.asarray(force.f(grid.nodes, t), dtype=float)


def rhs(state: State, force: ForceSpec) -> tuple[Field, Field]:
    """(du/dt, drho/dt) with dealiased products.

    du/dt = -u u' - L_a(rho u) + u L_a rho + f;  drho/dt = -(rho u)'.
    """
    u, rho, alpha = state.u, state.rho, state.alpha
    m = dealiased_product(rho, u)
    transport = dealiased_product(u, u.derivative() - rho.frac_laplacian(alpha))
    du = -transport - m.frac_laplacian(alpha)
    fvals = _force_field(state.grid, force, state.t)
    if fvals is not None:
        du = Field(state.grid, du.samples + fvals)
    drho = -m.derivative()
    return du, drho


def _e_rhs(state: State, force: ForceSpec) -> Field:
    """Conservation-law right-hand side for the cross-check copy of e."""
    ue = dealiased_product(state.u, state.e_evolved)
    out = -ue.derivative()
    if not force.is_zero:
        out = Field(state.grid, out.samples + np.asarray(force.f_x(state.grid.nodes, state.t), float))
    return out


def cfl_timestep(state: State, cfl: float) -> float:
    """CFL-limited dt from the advective and dissipative stability scales."""
    grid, alpha = state.grid, state.alpha
    umax = float(np.max(np.abs(state.u.samples)))
    adv = grid.node_spacing / umax if umax > 0 else np.inf
    kmax = grid.n_points // 2
    stiff = 1.0 / (frac_multiplier_constant(alpha) * kmax ** alpha * float(np.max(state.rho.samples)))
    return cfl * min(adv, stiff)


def step(state: State, force: ForceSpec, dt_max: float, cfl: float = 0.4) -> State:
    """One explicit SSP-RK3 step of size min(dt_max, CFL limit)."""
    dt = min(dt_max, cfl_timestep(state, cfl))
    if not np.isfinite(dt) or dt <= 0:
        raise SolverError("non-positive or non-finite time step", state.t)
    evolve_e = state.e_evolved is not None

    def stage(s: State) -> tuple[Field, Field, Field | None]:
        du, drho = rhs(s, force)
        de = _e_rhs(s, force) if evolve_e else None
        return du, drho, de

    u0, r0, t0 = state.u, state.rho, state.t
    e0 = state.e_evolved

    du, dr, de = stage(state)
    s1 = State(u0 + dt * du, r0 + dt * dr, t0 + dt, state.alpha,
               e_evolved=(e0 + dt * de) if evolve_e else None)

    du, dr, de = stage(s1)
    u2 = 0.75 * u0 + 0.25 * (s1.u + dt * du)
    r2 = 0.75 * r0 + 0.25 * (s1.rho + dt * dr)
    e2 = (0.75 * e0 + 0.25 * (s1.e_evolved + dt * de)) if evolve_e else None
    s2 = State(u2, r2, t0 + 0.5 * dt, state.alpha, e_evolved=e2)

    du, dr, de = stage(s2)
    u3 = (1.0 / 3.0) * u0 + (2.0 / 3.0) * (s2.u + dt * du)
    r3 = (1.0 / 3.0) * r0 + (2.0 / 3.0) * (s2.rho + dt * dr)
    e3 = ((1.0 / 3.0) * e0 + (2.0 / 3.0) * (s2.e_evolved + dt * de)) if evolve_e else None
    out = State(u3, r3, t0 + dt, state.alpha, e_evolved=e3)

    if not (np.all(np.isfinite(out.u.samples)) and np.all(np.isfinite(out.rho.samples))):
        raise SolverError("non-finite values after step", out.t)
    out.check_valid()
    return out


@dataclass
class SimConfig:
    """Run parameters; initial data and force come from the named catalogs."""

    n_points: int = 256
    alpha: float = 1.0
    t_end: float = 1.0
    cfl_number: float = 0.4
    output_interval: float = 0.01  # snapshot spacing in time units
    padding_factor: int = 2
    initial_data: str = "smooth_decay"
    initial_params: dict = dc_field(default_factory=dict)
    force_name: str = "zero"
    force_params: dict = dc_field(default_factory=dict)
    seed: int | None = None
    rho_floor: float = 1e-3
    evolve_e_cross_check: bool = False
    dt_fixed: float | None = None  # overrides the CFL step when set

    def __post_init__(self):
        if self.t_end <= 0 or self.output_interval <= 0 or self.cfl_number <= 0:
            raise ValueError("t_end, output_interval and cfl_number must be positive")

    def build_grid(self) -> TorusGrid:
        return TorusGrid(self.n_points, padding_factor=self.padding_factor)

    def build_force(self) -> ForceSpec:
        from .forcing import force_from_config

        return force_from_config(self.force_name, self.force_params)

    def build_initial_state(self) -> State:
        grid = self.build_grid()
        u0, rho0, e0 = make_initial_data(
            grid, self.alpha, self.initial_data, self.initial_params,
            seed=self.seed, floor=self.rho_floor,
        )
        return State(u0, rho0, 0.0, self.alpha,
                     e_evolved=e0 if self.evolve_e_cross_check else None)


class Trajectory:
    """Snapshots (State, DerivedFields) at the configured output times."""

    def __init__(self, config: SimConfig, force: ForceSpec):
        self.config = config
        self.force = force
        self.states: list[State] = []
        self.derived: list[DerivedFields] = []

    def append(self, state: State):
        self.states.append(state)
        self.derived.append(compute_derived(state))

    @property
    def times(self) -> np.ndarray:
        return np.array([s.t for s in self.states])

    def __len__(self):
        return len(self.states)

    def __iter__(self):
        return iter(zip(self.states, self.derived))


def evolve(config: SimConfig, force: ForceSpec | None = None,
           progress: Callable[[State], None] | None = None) -> Trajectory:
    """Integrate to t_end, emitting snapshots every output_interval.

    The step is clipped to land exactly on each snapshot time, which makes
    runs with different data comparable at identical times and makes stride
    refinement a pure time-quadrature refinement.  Solver failures are
    re-raised as :class:`SolverError` carrying the failing time.
    """
    force = config.build_force() if force is None else force
    t_now = 0.0
    try:
        state = config.build_initial_state()
        traj = Trajectory(config, force)
        traj.append(state)
        t_next = config.output_interval
        eps = 1e-12
        while state.t < config.t_end - eps:
            target = min(t_next, config.t_end)
            dt_cap = config.dt_fixed if config.dt_fixed is not None else np.inf
            state = step(state, force, min(dt_cap, target - state.t), cfl=config.cfl_number)
            t_now = state.t
            if progress is not None:
                progress(state)
            if state.t >= target - eps:
                traj.append(state)
                t_next = round(t_next / config.output_interval + 1) * config.output_interval
    except VacuumError as exc:
        raise SolverError(str(exc), t_now) from exc
    return traj
