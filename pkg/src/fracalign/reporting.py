"""Delimited output: diagnostics, budget, and Besov-block CSV files.

Column order is fixed, floats carry 17 significant digits, so identical runs
produce byte-identical files.
"""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

__all__ = [
    "diagnostics_columns",
    "write_diagnostics_csv",
    "write_budget_csv",
    "write_besov_csv",
    "read_csv_columns",
]


def _fmt(x: float) -> str:
    return f"{float(x):.17g}"


def diagnostics_columns(gammas) -> list[str]:
    cols = [
        "t", "mass", "momentum", "energy", "rho_energy",
        "dissipation", "rho_dissipation", "alignment",
        "rho_min", "rho_max", "q_inf_norm", "e_inf_norm",
        "u_prime_inf_norm", "rho_prime_inf_norm",
        "energy_residual", "rho_energy_residual",
    ]
    cols += [f"holder_rho_{g:g}" for g in gammas]
    cols += [f"holder_u_{g:g}" for g in gammas]
    return cols


def write_diagnostics_csv(path, records, gammas) -> None:
    path = Path(path)
    cols = diagnostics_columns(gammas)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(cols)
        for r in records:
            row = [
                r.t, r.mass, r.momentum, r.energy, r.rho_energy,
                r.dissipation, r.rho_dissipation, r.alignment,
                r.rho_min, r.rho_max, r.q_inf_norm, r.e_inf_norm,
                r.u_prime_inf_norm, r.rho_prime_inf_norm,
                r.energy_residual, r.rho_energy_residual,
            ]
            row += [r.holder_rho[g] for g in gammas]
            row += [r.holder_u[g] for g in gammas]
            writer.writerow([_fmt(v) for v in row])


def write_budget_csv(path, tables) -> None:
    """Rows (t, Q, E_leQ, flux_int, eps_Q, force_term, residual)."""
    path = Path(path)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["t", "Q", "E_leQ", "flux_int", "eps_Q", "force_term", "residual"])
        for tb in tables:
            for i, t in enumerate(tb.times):
                writer.writerow([
                    _fmt(t), str(tb.Q), _fmt(tb.scale_energy[i]),
                    _fmt(tb.flux_integral[i]), _fmt(tb.eps_q[i]),
                    _fmt(tb.force_term[i]), _fmt(tb.residual[i]),
                ])


def write_besov_csv(path, diag: dict) -> None:
    path = Path(path)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["q", "d13_u", "dtilde_u", "dtilde_rho"])
        for i, q in enumerate(diag["q"]):
            writer.writerow([
                str(int(q)), _fmt(diag["d13_u"][i]),
                _fmt(diag["dtilde_u"][i]), _fmt(diag["dtilde_rho"][i]),
            ])


def read_csv_columns(path) -> dict[str, np.ndarray]:
    """Read a CSV produced by the writers above into named float arrays."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = [[float(v) for v in row] for row in reader]
    data = np.asarray(rows) if rows else np.zeros((0, len(header)))
    return {name: data[:, i] for i, name in enumerate(header)}
