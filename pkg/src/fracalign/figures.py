"""Render report figures from the delimited outputs of a result directory.

Each figure is written as a PNG next to the CSV it was built from; only the
figures whose inputs exist are produced.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .reporting import read_csv_columns

__all__ = ["render_report"]


def _save(fig, path: Path, made: list):
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)
    made.append(path)


def _diagnostics_figures(csv_path: Path, outdir: Path, made: list):
    cols = read_csv_columns(csv_path)
    t = cols["t"]
    if len(t) < 2:
        return

    fig, axes = plt.subplots(1, 2, figsize=(9, 3.4))
    axes[0].plot(t, cols["energy"], label="kinetic energy")
    axes[0].plot(t, cols["rho_energy"], label="density energy")
    axes[0].set_xlabel("t")
    axes[0].legend(fontsize=8)
    axes[1].semilogy(t[1:], np.abs(cols["energy_residual"][1:]) + 1e-18, label="energy residual")
    axes[1].semilogy(t[1:], np.abs(cols["rho_energy_residual"][1:]) + 1e-18,
                     label="density-energy residual")
    axes[1].set_xlabel("t")
    axes[1].legend(fontsize=8)
    _save(fig, outdir / "energy.png", made)

    fig, ax = plt.subplots(figsize=(5, 3.4))
    positive = cols["alignment"] > 0
    ax.semilogy(t[positive], cols["alignment"][positive], label="velocity diameter")
    ax.set_xlabel("t")
    ax.legend(fontsize=8)
    _save(fig, outdir / "alignment.png", made)

    fig, ax = plt.subplots(figsize=(5, 3.4))
    ax.plot(t, cols["rho_min"], label="min density")
    ax.plot(t, cols["rho_max"], label="max density")
    ax.set_xlabel("t")
    ax.legend(fontsize=8)
    _save(fig, outdir / "density_extrema.png", made)

    holder_cols = [c for c in cols if c.startswith("holder_rho_")]
    if holder_cols and np.all(t[1:] > 0):
        fig, ax = plt.subplots(figsize=(5, 3.4))
        for c in holder_cols:
            ax.loglog(t[1:], cols[c][1:], label=c.replace("holder_rho_", "gamma="))
        ax.set_xlabel("t")
        ax.set_ylabel("density Hoelder seminorm")
        ax.legend(fontsize=8)
        _save(fig, outdir / "holder_scaling.png", made)


def _budget_figures(csv_path: Path, outdir: Path, made: list):
    cols = read_csv_columns(csv_path)
    if len(cols["t"]) == 0:
        return
    qs = np.unique(cols["Q"]).astype(int)
    flux_final = []
    res_worst = []
    for q in qs:
        sel = cols["Q"] == q
        flux_final.append(abs(cols["flux_int"][sel][-1]))
        res_worst.append(np.max(np.abs(cols["residual"][sel])))
    fig, axes = plt.subplots(1, 2, figsize=(9, 3.4))
    axes[0].semilogy(qs, np.asarray(flux_final) + 1e-300, "o-")
    axes[0].set_xlabel("cutoff block Q")
    axes[0].set_ylabel("|time-integrated flux|")
    axes[1].semilogy(qs, np.asarray(res_worst) + 1e-300, "s-")
    axes[1].set_xlabel("cutoff block Q")
    axes[1].set_ylabel("worst budget residual")
    _save(fig, outdir / "budget_decay.png", made)


def _besov_figure(csv_path: Path, outdir: Path, made: list):
    cols = read_csv_columns(csv_path)
    if len(cols["q"]) == 0:
        return
    fig, ax = plt.subplots(figsize=(5, 3.4))
    ax.semilogy(cols["q"], cols["d13_u"] + 1e-300, "o-", label="d13(u)")
    ax.semilogy(cols["q"], cols["dtilde_u"] + 1e-300, "s-", label="dtilde(u)")
    ax.semilogy(cols["q"], cols["dtilde_rho"] + 1e-300, "^-", label="dtilde(rho)")
    ax.set_xlabel("block q")
    ax.legend(fontsize=8)
    _save(fig, outdir / "besov_blocks.png", made)


def render_report(result_dir) -> list[Path]:
    """Produce figures for every recognized CSV under result_dir (recursively)."""
    root = Path(result_dir)
    made: list[Path] = []
    for csv_path in sorted(root.rglob("diagnostics.csv")):
        _diagnostics_figures(csv_path, csv_path.parent, made)
    for csv_path in sorted(root.rglob("budget.csv")):
        _budget_figures(csv_path, csv_path.parent, made)
    for csv_path in sorted(root.rglob("besov.csv")):
        _besov_figure(csv_path, csv_path.parent, made)
    return made
