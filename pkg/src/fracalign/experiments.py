"""Run-level experiments: the mollified-data limit and two-run stability.

Both experiments wrap the plain solver: the first evolves the same rough
initial data mollified at a decreasing sequence of widths and checks that
the solutions form a Cauchy-like sequence at fixed positive times; the
second evolves a base state and a perturbed copy and tracks the weighted
distance functional

    Phi(t) = || sqrt(rho_s) u_d ||_2^2 + || rho_d / sqrt(rho_s) ||_2^2
             + || q_d ||_2^2,

(d = difference, s = sum), whose Groenwall structure makes an exponential
envelope the operational statement of uniqueness/stability.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dynamics import SimConfig, State, Trajectory, compute_derived, evolve
from .initial_data import make_initial_data, mollify
from .spectral import Field

__all__ = [
    "MollificationReport",
    "mollification_convergence",
    "StabilityReport",
    "uniqueness_gronwall",
    "distance_functional",
]


@dataclass
class MollificationReport:
    eps_list: list[float]
    compare_times: list[float]
    u_distances: np.ndarray       # shape (n_pairs, n_times): ||u_ej - u_ej+1||_inf
    rho_distances: np.ndarray
    cauchy_u: bool                # distances decrease in j at every fixed time
    cauchy_rho: bool
    contraction_ratios: np.ndarray  # per-time ratio of successive u distances


def mollification_convergence(config: SimConfig, eps_list, compare_times) -> MollificationReport:
    """Evolve mollified copies of the configured initial data and compare.

    ``eps_list`` must be strictly decreasing with at least three entries,
    all above 4 * node_spacing so every kernel is well sampled; comparisons
    happen at the requested positive times (which must be snapshot times).
    """
    eps_list = [float(e) for e in eps_list]
    if len(eps_list) < 3:
        raise ValueError("need at least three mollification widths")
    if any(b >= a for a, b in zip(eps_list, eps_list[1:])):
        raise ValueError("eps_list must be strictly decreasing")
    grid = config.build_grid()
    if eps_list[0] <= 0 or eps_list[-1] < 4.0 * grid.node_spacing:
        raise ValueError("all widths must exceed 4 * node_spacing")
    compare_times = [float(t) for t in compare_times]
    if not compare_times:
        raise ValueError("need at least one comparison time")

    u0, rho0, _ = make_initial_data(grid, config.alpha, config.initial_data,
                                    config.initial_params, seed=config.seed,
                                    floor=config.rho_floor)
    trajectories: list[Trajectory] = []
    for eps in eps_list:
        traj = _evolve_from_state(
            config, State(mollify(u0, eps), mollify(rho0, eps), 0.0, config.alpha))
        trajectories.append(traj)

    def at_time(traj: Trajectory, t: float) -> State:
        i = int(np.argmin(np.abs(traj.times - t)))
        if abs(traj.times[i] - t) > 1e-9:
            raise ValueError(f"comparison time {t} is not a snapshot time")
        return traj.states[i]

    n_pairs = len(eps_list) - 1
    du = np.zeros((n_pairs, len(compare_times)))
    drho = np.zeros_like(du)
    for j in range(n_pairs):
        for i, t in enumerate(compare_times):
            a, b = at_time(trajectories[j], t), at_time(trajectories[j + 1], t)
            du[j, i] = float(np.max(np.abs(a.u.samples - b.u.samples)))
            drho[j, i] = float(np.max(np.abs(a.rho.samples - b.rho.samples)))
    floor = 1e-13
    cauchy_u = bool(np.all((du[1:] <= du[:-1] + floor)))
    cauchy_rho = bool(np.all((drho[1:] <= drho[:-1] + floor)))
    ratios = du[:-1] / np.maximum(du[1:], 1e-300)
    return MollificationReport(
        eps_list=eps_list, compare_times=compare_times,
        u_distances=du, rho_distances=drho,
        cauchy_u=cauchy_u, cauchy_rho=cauchy_rho,
        contraction_ratios=ratios,
    )


def _evolve_from_state(config: SimConfig, state: State) -> Trajectory:
    """evolve() with an explicit initial state instead of a catalog recipe."""
    from . import dynamics

    force = config.build_force()
    traj = Trajectory(config, force)
    traj.append(state)
    t_next = config.output_interval
    eps = 1e-12
    while state.t < config.t_end - eps:
        target = min(t_next, config.t_end)
        cap = config.dt_fixed if config.dt_fixed is not None else np.inf
        state = dynamics.step(state, force, min(cap, target - state.t), cfl=config.cfl_number)
        if state.t >= target - eps:
            traj.append(state)
            t_next = round(t_next / config.output_interval + 1) * config.output_interval
    return traj


# ---------------------------------------------------------------------------
# two-run stability (the operational content of uniqueness)
# ---------------------------------------------------------------------------

def distance_functional(a: State, b: State) -> float:
    """Phi for a pair of states on the same grid."""
    dx = a.grid.node_spacing
    rho_s = a.rho.samples + b.rho.samples
    u_d = a.u.samples - b.u.samples
    rho_d = a.rho.samples - b.rho.samples
    qa = compute_derived(a).q.samples
    qb = compute_derived(b).q.samples
    q_d = qa - qb
    return float(dx * (np.sum(rho_s * u_d ** 2)
                       + np.sum(rho_d ** 2 / rho_s)
                       + np.sum(q_d ** 2)))


@dataclass
class StabilityReport:
    perturbation: float
    times: np.ndarray
    phi: np.ndarray
    fitted_rate: float        # least-squares slope of log Phi
    envelope_rate: float      # smallest rate whose envelope dominates Phi
    envelope_ok: bool
    zero_identical: bool      # Phi == 0 (to 1e-12 relative) for delta = 0


def uniqueness_gronwall(config: SimConfig, perturbation_size: float,
                        perturb_mode: int = 1) -> StabilityReport:
    """Evolve base and perturbed data; fit the exponential envelope of Phi.

    The perturbation adds ``delta * cos(mode x)`` to the initial velocity
    (the derived quantity e is recomputed, so compatibility is preserved).
    ``delta = 0`` must give Phi identically zero: the two runs are then
    bit-identical.
    """
    delta = float(perturbation_size)
    grid = config.build_grid()
    u0, rho0, _ = make_initial_data(grid, config.alpha, config.initial_data,
                                    config.initial_params, seed=config.seed,
                                    floor=config.rho_floor)
    base = _evolve_from_state(config, State(u0, rho0, 0.0, config.alpha))
    bump = Field.from_function(grid, lambda x: np.cos(perturb_mode * x))
    pert = _evolve_from_state(config, State(u0 + delta * bump, rho0, 0.0, config.alpha))

    t = base.times
    phi = np.array([distance_functional(a, b) for (a, _), (b, _) in zip(base, pert)])
    if delta == 0.0:
        zero_identical = bool(np.all(phi <= 1e-12 * max(1.0, float(np.max(np.abs(phi) + 1.0)))))
        return StabilityReport(perturbation=0.0, times=t, phi=phi,
                               fitted_rate=0.0, envelope_rate=0.0,
                               envelope_ok=True, zero_identical=zero_identical)
    pos = phi > 0
    fitted = float(np.polyfit(t[pos], np.log(phi[pos]), 1)[0])
    with np.errstate(divide="ignore", invalid="ignore"):
        raw = np.log(phi[1:] / phi[0]) / t[1:]
    envelope = float(np.max(raw[np.isfinite(raw)])) if np.any(np.isfinite(raw)) else 0.0
    ok = bool(np.all(phi <= phi[0] * np.exp(envelope * t) * (1.0 + 1e-9)))
    return StabilityReport(perturbation=delta, times=t, phi=phi,
                           fitted_rate=fitted, envelope_rate=envelope,
                           envelope_ok=ok, zero_identical=False)
