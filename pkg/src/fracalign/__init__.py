"""fracalign: pseudo-spectral solver and diagnostics for 1D fractional
Euler alignment dynamics on the 2*pi-periodic torus."""

from .spectral import (
    Field,
    TorusGrid,
    besov_seminorm,
    dealiased_product,
    holder_seminorm,
    lp_low,
    lp_project,
)
from .kernel import (
    KernelSpec,
    d_alpha,
    frac_laplacian_quadrature,
    frac_multiplier_constant,
    iota,
    phi,
)
from .forcing import ForceSpec, time_bump_force, trig_force, zero_force
from .initial_data import VacuumError, make_initial_data, mollify
from .dynamics import (
    DerivedFields,
    SimConfig,
    SolverError,
    State,
    Trajectory,
    compute_derived,
    evolve,
    rhs,
    step,
)
from .diagnostics import (
    BoundConstants,
    DiagnosticsRecord,
    alignment_decay,
    compute_bound_constants,
    compute_record,
    dissipation_double_integral,
    energy_residual,
    flocking_study,
    holder_scaling_study,
    rho_energy_residual,
    spectral_dissipation,
    trajectory_records,
)
from .budget import (
    budget_residual,
    compute_budget,
    eps_q,
    flux,
    onsager_convergence_study,
    scale_energy,
    u_ratio,
)
from .experiments import mollification_convergence, uniqueness_gronwall
from .snapshots import load_snapshot, save_snapshot
from .config import ConfigError, ScenarioSpec, load_config, parse_config_text
from .scenarios import ScenarioResult, run_scenario

__version__ = "0.1.0"
