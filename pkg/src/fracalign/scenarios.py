"""Scenario pipeline: evolve, persist, diagnose, verify.

A scenario is a parsed config plus a list of enabled named checks.  Running
one produces a directory with the snapshot files, the diagnostics CSV, the
budget/Besov CSVs when the dyadic sweep is enabled, and a plain-text summary
with exactly one PASS/FAIL line per enabled check (measured value and
tolerance included).  Tolerances are pinned here, next to the checks.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import diagnostics as diag
from . import budget as bud
from .config import ScenarioSpec
from .dynamics import SolverError, Trajectory, evolve
from .experiments import mollification_convergence, uniqueness_gronwall
from .kernel import KernelSpec
from .reporting import write_besov_csv, write_budget_csv, write_diagnostics_csv
from .snapshots import save_snapshot

__all__ = ["CheckResult", "ScenarioResult", "run_scenario", "output_root", "OUTPUT_ENV"]

OUTPUT_ENV = "FRACALIGN_OUT"

# pinned tolerances, one place
MASS_DRIFT_REL = 1e-11
E_MEAN_DRIFT_ABS = 1e-9
MOMENTUM_DRIFT_ABS = 1e-11          # unforced runs
MOMENTUM_BALANCE_REL = 1e-3         # forced runs, trapezoid-limited
ENERGY_RESIDUAL_REL = 1e-5
DISSIPATION_ORACLE_REL = 1e-5
BUDGET_RESIDUAL_REL = 1e-5
ONSAGER_DECAY_FACTOR = 10.0
ALIGNMENT_ENVELOPE_SLACK = 1e-6
HOLDER_SLOPE_TOL = 0.1
NO_BLOWUP_FACTOR = 50.0
COMPATIBILITY_TOL = 1e-8
STABILITY_ZERO_TOL = 1e-12
STABILITY_LINEAR_RESPONSE_REL = 0.05


@dataclass
class CheckResult:
    name: str
    passed: bool
    measured: float
    tolerance: float
    detail: str = ""

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        extra = f"  {self.detail}" if self.detail else ""
        return f"{tag} {self.name}: measured={self.measured:.6g} tol={self.tolerance:.6g}{extra}"


@dataclass
class ScenarioResult:
    name: str
    spec: ScenarioSpec
    outdir: Path
    snapshot_paths: list[Path] = field(default_factory=list)
    diagnostics_csv: Path | None = None
    budget_csv: Path | None = None
    besov_csv: Path | None = None
    checks: list[CheckResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def summary_text(self) -> str:
        lines = [f"scenario: {self.name}"]
        for key, val in sorted(self.spec.raw.items()):
            lines.append(f"  {key} = {val}")
        lines.append("")
        lines.extend(c.line() for c in self.checks)
        lines.append("")
        lines.append("RESULT: " + ("PASS" if self.passed else "FAIL"))
        return "\n".join(lines) + "\n"


def output_root(override=None) -> Path:
    if override is not None:
        return Path(override)
    return Path(os.environ.get(OUTPUT_ENV, "fracalign-out"))


# ---------------------------------------------------------------------------
# individual checks
# ---------------------------------------------------------------------------

def _check_conservation(traj: Trajectory, records) -> list[CheckResult]:
    t = traj.times
    mass = np.array([r.mass for r in records])
    mom = np.array([r.momentum for r in records])
    e_mean = np.array([d.e.quadrature() for _, d in traj])
    out = []
    drift = float(np.max(np.abs(mass - mass[0])) / abs(mass[0]))
    out.append(CheckResult("mass_conservation", drift < MASS_DRIFT_REL, drift, MASS_DRIFT_REL))
    edrift = float(np.max(np.abs(e_mean - e_mean[0])))
    out.append(CheckResult("e_mean_conservation", edrift < E_MEAN_DRIFT_ABS, edrift, E_MEAN_DRIFT_ABS))
    force = traj.force
    if force.is_zero:
        mdrift = float(np.max(np.abs(mom - mom[0])))
        out.append(CheckResult("momentum_conservation", mdrift < MOMENTUM_DRIFT_ABS,
                               mdrift, MOMENTUM_DRIFT_ABS))
    else:
        from .spectral import Field, dealiased_product

        src = np.zeros(len(traj))
        for i, (s, _) in enumerate(traj):
            if force.support_end is not None and s.t >= force.support_end:
                continue
            f = Field(s.grid, np.asarray(force.f(s.grid.nodes, s.t), float))
            src[i] = dealiased_product(s.rho, f).quadrature()
        bal = mom - mom[0] - diag.trapezoid_cumulative(t, src)
        scale = abs(mom[0]) + mass[0] * force.sup_f * max(t[-1], 1.0)
        rel = float(np.max(np.abs(bal)) / max(scale, 1e-300))
        out.append(CheckResult("momentum_balance", rel < MOMENTUM_BALANCE_REL,
                               rel, MOMENTUM_BALANCE_REL,
                               detail="relative to |mom0| + mass*sup_f*t_end"))
    return out


def _check_energy_laws(records, which: str) -> CheckResult:
    key = "energy_residual" if which == "energy_law" else "rho_energy_residual"
    vals = np.array([getattr(r, key) for r in records])
    worst = float(np.max(np.abs(vals)))
    return CheckResult(which, worst < ENERGY_RESIDUAL_REL, worst, ENERGY_RESIDUAL_REL)


def _check_dissipation_oracle(traj: Trajectory, max_samples: int = 9) -> CheckResult:
    idx = np.unique(np.linspace(0, len(traj) - 1, max_samples).astype(int))
    spec = KernelSpec(alpha=traj.config.alpha)
    worst = 0.0
    for i in idx:
        state = traj.states[i]
        ref = diag.spectral_dissipation(state)
        dbl = diag.dissipation_double_integral(state, spec)
        scale = max(abs(ref), 1e-12)
        worst = max(worst, abs(dbl - ref) / scale)
    return CheckResult("dissipation_oracle", worst < DISSIPATION_ORACLE_REL,
                       worst, DISSIPATION_ORACLE_REL)


def _check_bounds(traj: Trajectory, which: str) -> list[CheckResult]:
    constants = diag.compute_bound_constants(traj.states[0], traj.force)
    reports = {
        "density_bounds": lambda: diag.check_density_bounds(traj, constants),
        "q_bounds": lambda: diag.check_q_bound(traj, constants),
        "velocity_bound": lambda: [diag.check_velocity_bound(traj, constants)],
        "e_bound": lambda: [diag.check_e_bound(traj, constants)],
    }[which]()
    return [
        CheckResult(rep.name, rep.ok, rep.worst_margin, 0.0,
                    detail=f"worst margin at t={rep.worst_time:.4g}")
        for rep in reports
    ]


def _check_alignment(traj: Trajectory) -> list[CheckResult]:
    rep = diag.alignment_decay(traj, envelope_slack=ALIGNMENT_ENVELOPE_SLACK)
    return [
        CheckResult("alignment_envelope", rep.bound_ok,
                    float(np.max(rep.amplitude / max(rep.amplitude[0], 1e-300))),
                    0.0, detail=f"rate bound {rep.rate_bound:.6g}, window from t={rep.t_start:.4g}"),
        CheckResult("alignment_rate", rep.fit_ok, rep.fitted_rate, rep.rate_bound,
                    detail="fitted decay rate must reach the mass*iota(pi) bound"),
    ]


def _check_budget(tables) -> CheckResult:
    worst = float(max(np.max(np.abs(tb.residual)) for tb in tables))
    return CheckResult("budget_closure", worst < BUDGET_RESIDUAL_REL, worst, BUDGET_RESIDUAL_REL)


def _check_onsager(study) -> list[CheckResult]:
    return [
        CheckResult("flux_vanishing", study.flux_vanishes, study.flux_decay_factor,
                    ONSAGER_DECAY_FACTOR, detail=f"slope {study.flux_slope:.3g}"),
        CheckResult("dissipation_localization", study.eps_converges, study.eps_decay_factor,
                    ONSAGER_DECAY_FACTOR),
    ]


def _check_holder(traj: Trajectory, gammas) -> list[CheckResult]:
    out = []
    for g in gammas:
        rep = diag.holder_scaling_study(traj, g, "rho", fit_tolerance=HOLDER_SLOPE_TOL)
        out.append(CheckResult(
            f"holder_scaling_rho_{g:g}", rep.ok, rep.slope, rep.slope_bound - HOLDER_SLOPE_TOL,
            detail=f"slope vs bound {rep.slope_bound:.3g} (envelope C={rep.envelope_constant:.4g})"))
        rep_u = diag.holder_scaling_study(traj, g, "u", fit_tolerance=HOLDER_SLOPE_TOL)
        out.append(CheckResult(
            f"holder_scaling_u_{g:g}", rep_u.ok, rep_u.slope, rep_u.slope_bound - HOLDER_SLOPE_TOL,
            detail=f"slope vs bound {rep_u.slope_bound:.3g}"))
    return out


def _check_flocking(traj: Trajectory) -> list[CheckResult]:
    rep = diag.flocking_study(traj)
    dists = ", ".join(f"{d:.3e}" for _, _, d in rep.cauchy_pairs)
    return [
        CheckResult("flocking_velocity_gradient", rep.u_prime_rate_negative,
                    rep.u_prime_rate, 0.0, detail="fitted exponential rate must be negative"),
        CheckResult("flocking_density_cauchy", rep.cauchy_decreasing,
                    rep.cauchy_pairs[-1][2] if rep.cauchy_pairs else 0.0, 0.0,
                    detail=f"dyadic distances [{dists}]"),
    ]


def _check_no_blowup(records) -> list[CheckResult]:
    out = []
    for key in ("rho_prime_inf_norm", "e_inf_norm", "u_prime_inf_norm"):
        vals = np.array([getattr(r, key) for r in records])
        cap = NO_BLOWUP_FACTOR * (vals[0] + 1.0)
        worst = float(np.max(vals))
        out.append(CheckResult(f"no_blowup_{key}", worst <= cap, worst, cap))
    return out


def _check_compatibility(traj: Trajectory) -> CheckResult:
    worst = 0.0
    for state, derived in traj:
        if state.e_evolved is None:
            return CheckResult("compatibility", False, np.inf, COMPATIBILITY_TOL,
                               detail="cross-check mode not enabled (set evolve_e = true)")
        worst = max(worst, float(np.max(np.abs(state.e_evolved.samples - derived.e.samples))))
    return CheckResult("compatibility", worst < COMPATIBILITY_TOL, worst, COMPATIBILITY_TOL)


def _experiment_checks(spec: ScenarioSpec) -> list[CheckResult]:
    out = []
    if spec.eps_list:
        rep = mollification_convergence(spec.sim, spec.eps_list, spec.compare_times)
        ratios = ", ".join(f"{r:.3g}" for r in np.atleast_1d(rep.contraction_ratios.ravel()))
        out.append(CheckResult("mollification_cauchy_u", rep.cauchy_u,
                               float(rep.u_distances[-1].max()), 0.0,
                               detail=f"successive-ratio(s) [{ratios}]"))
        out.append(CheckResult("mollification_cauchy_rho", rep.cauchy_rho,
                               float(rep.rho_distances[-1].max()), 0.0))
    if spec.perturbation:
        zero = uniqueness_gronwall(spec.sim, 0.0)
        out.append(CheckResult("stability_zero_perturbation", zero.zero_identical,
                               float(np.max(zero.phi)), STABILITY_ZERO_TOL))
        reports = [uniqueness_gronwall(spec.sim, d) for d in spec.perturbation]
        for rep in reports:
            out.append(CheckResult(f"stability_envelope_{rep.perturbation:g}", rep.envelope_ok,
                                   rep.envelope_rate, 0.0,
                                   detail=f"fitted rate {rep.fitted_rate:.4g}"))
        if len(reports) >= 2:
            a, b = reports[0], reports[1]
            ra = a.phi / max(a.phi[0], 1e-300)
            rb = b.phi / max(b.phi[0], 1e-300)
            dev = float(np.max(np.abs(ra - rb) / np.maximum(np.abs(ra), 1e-300)))
            out.append(CheckResult("stability_linear_response",
                                   dev < STABILITY_LINEAR_RESPONSE_REL, dev,
                                   STABILITY_LINEAR_RESPONSE_REL,
                                   detail="normalized Phi trajectories across perturbation sizes"))
    return out


# ---------------------------------------------------------------------------
# the pipeline
# ---------------------------------------------------------------------------

def run_scenario(spec: ScenarioSpec, outdir=None, save_snapshots: bool = True) -> ScenarioResult:
    """Execute the full pipeline for one scenario.

    Solver failures propagate as :class:`SolverError`; nothing is written for
    the failed portion beyond the snapshots already completed (CSV files are
    written only after a successful run, so they are never truncated).
    """
    outdir = output_root(outdir) / spec.name
    outdir.mkdir(parents=True, exist_ok=True)
    result = ScenarioResult(name=spec.name, spec=spec, outdir=outdir)

    traj = evolve(spec.sim)
    records = diag.trajectory_records(traj, gammas=spec.gammas)

    if save_snapshots:
        snapdir = outdir / "snapshots"
        snapdir.mkdir(exist_ok=True)
        for i, (state, derived) in enumerate(traj):
            p = snapdir / f"snap_{i:06d}.bin"
            save_snapshot(p, state, derived.e)
            result.snapshot_paths.append(p)

    result.diagnostics_csv = outdir / "diagnostics.csv"
    write_diagnostics_csv(result.diagnostics_csv, records, spec.gammas)

    tables = None
    study = None
    if spec.budget or "budget_closure" in spec.checks or "onsager_trends" in spec.checks:
        study = bud.onsager_convergence_study(traj, spec.q_list,
                                              decay_required=ONSAGER_DECAY_FACTOR)
        tables = study.tables
        result.budget_csv = outdir / "budget.csv"
        write_budget_csv(result.budget_csv, tables)
        result.besov_csv = outdir / "besov.csv"
        write_besov_csv(result.besov_csv, bud.besov_diagnostics(traj))

    for name in spec.checks:
        if name == "conservation":
            result.checks.extend(_check_conservation(traj, records))
        elif name in ("energy_law", "rho_energy_law"):
            result.checks.append(_check_energy_laws(records, name))
        elif name == "dissipation_oracle":
            result.checks.append(_check_dissipation_oracle(traj))
        elif name in ("density_bounds", "q_bounds", "velocity_bound", "e_bound"):
            result.checks.extend(_check_bounds(traj, name))
        elif name == "alignment":
            result.checks.extend(_check_alignment(traj))
        elif name == "budget_closure":
            result.checks.append(_check_budget(tables))
        elif name == "onsager_trends":
            result.checks.extend(_check_onsager(study))
        elif name == "holder_scaling":
            result.checks.extend(_check_holder(traj, spec.gammas))
        elif name == "flocking":
            result.checks.extend(_check_flocking(traj))
        elif name == "no_blowup":
            result.checks.extend(_check_no_blowup(records))
        elif name == "compatibility":
            result.checks.append(_check_compatibility(traj))

    result.checks.extend(_experiment_checks(spec))

    (outdir / "summary.txt").write_text(result.summary_text())
    return result
