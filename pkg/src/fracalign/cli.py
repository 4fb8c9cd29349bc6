"""Command-line interface.

Subcommands:

    run <config>            run one scenario config, print the check summary
    sweep <dir>             run every *.cfg in a directory
    diagnose <snapshot...>  per-snapshot diagnostics CSV from saved snapshots
    budget <trajectory-dir> dyadic budget CSV from a directory of snapshots
    report <result-dir>     render figures next to the delimited output

Exit codes: 0 all checks pass, 1 a check failed, 2 solver error,
3 configuration error.  The output root defaults to ./fracalign-out and can
be overridden with --out or the FRACALIGN_OUT environment variable.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

EXIT_PASS = 0
EXIT_CHECK_FAILURE = 1
EXIT_SOLVER_ERROR = 2
EXIT_CONFIG_ERROR = 3


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fracalign", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--out", default=None, help="output root (default $FRACALIGN_OUT or ./fracalign-out)")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one scenario config")
    p_run.add_argument("config", type=Path)
    p_run.add_argument("--no-snapshots", action="store_true", help="skip snapshot files")

    p_sweep = sub.add_parser("sweep", help="run every *.cfg in a directory")
    p_sweep.add_argument("directory", type=Path)

    p_diag = sub.add_parser("diagnose", help="diagnostics CSV from snapshot files")
    p_diag.add_argument("snapshots", nargs="+", type=Path)
    p_diag.add_argument("--csv", type=Path, default=None, help="output CSV path")

    p_budget = sub.add_parser("budget", help="dyadic budget CSV from a snapshot directory")
    p_budget.add_argument("trajectory_dir", type=Path)
    p_budget.add_argument("--csv", type=Path, default=None)

    p_report = sub.add_parser("report", help="render figures for a result directory")
    p_report.add_argument("result_dir", type=Path)
    return parser


def _cmd_run(args) -> int:
    from .config import ConfigError, load_config
    from .dynamics import SolverError
    from .scenarios import run_scenario

    try:
        spec = load_config(args.config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG_ERROR
    try:
        result = run_scenario(spec, outdir=args.out, save_snapshots=not args.no_snapshots)
    except SolverError as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER_ERROR
    print(result.summary_text(), end="")
    return EXIT_PASS if result.passed else EXIT_CHECK_FAILURE


def _cmd_sweep(args) -> int:
    configs = sorted(Path(args.directory).glob("*.cfg"))
    if not configs:
        print(f"no *.cfg files under {args.directory}", file=sys.stderr)
        return EXIT_CONFIG_ERROR
    worst = EXIT_PASS
    for cfg in configs:
        print(f"== {cfg.name}")
        code = _cmd_run(argparse.Namespace(config=cfg, out=args.out, no_snapshots=False))
        worst = max(worst, code)
    return worst


def _cmd_diagnose(args) -> int:
    import numpy as np

    from .diagnostics import DEFAULT_GAMMAS, compute_record
    from .dynamics import compute_derived
    from .reporting import write_diagnostics_csv
    from .snapshots import SnapshotError, load_snapshot

    records = []
    try:
        for path in args.snapshots:
            snap = load_snapshot(path)
            records.append(compute_record(snap.state, compute_derived(snap.state)))
    except SnapshotError as exc:
        print(f"snapshot error: {exc}", file=sys.stderr)
        return EXIT_CONFIG_ERROR
    records.sort(key=lambda r: r.t)
    out = args.csv or Path("diagnostics.csv")
    write_diagnostics_csv(out, records, DEFAULT_GAMMAS)
    print(f"wrote {out} ({len(records)} rows)")
    return EXIT_PASS


def _load_trajectory_dir(directory: Path):
    import numpy as np

    from .config import ConfigError
    from .dynamics import SimConfig, Trajectory
    from .forcing import zero_force
    from .snapshots import load_snapshot

    paths = sorted(Path(directory).glob("*.bin"))
    if not paths:
        raise ConfigError(f"no snapshot files under {directory}")
    snaps = [load_snapshot(p) for p in paths]
    snaps.sort(key=lambda s: s.state.t)
    first = snaps[0].state
    times = [s.state.t for s in snaps]
    interval = float(min(np.diff(times))) if len(times) > 1 else 1.0

    config = SimConfig(n_points=first.grid.n_points, alpha=first.alpha,
                       t_end=max(times[-1], interval), output_interval=interval)

    traj = Trajectory(config, zero_force())
    for s in snaps:
        traj.append(s.state)
    return traj


def _cmd_budget(args) -> int:
    from .budget import compute_budget
    from .config import ConfigError
    from .reporting import write_budget_csv
    from .snapshots import SnapshotError

    try:
        traj = _load_trajectory_dir(args.trajectory_dir)
    except (ConfigError, SnapshotError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG_ERROR
    tables = compute_budget(traj)
    out = args.csv or (Path(args.trajectory_dir) / "budget.csv")
    write_budget_csv(out, tables)
    print(f"wrote {out} ({len(tables)} cutoffs x {len(traj)} snapshots)")
    return EXIT_PASS


def _cmd_report(args) -> int:
    from .figures import render_report

    made = render_report(args.result_dir)
    for p in made:
        print(f"wrote {p}")
    if not made:
        print(f"no recognized CSV files under {args.result_dir}", file=sys.stderr)
        return EXIT_CONFIG_ERROR
    return EXIT_PASS


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    handler = {
        "run": _cmd_run,
        "sweep": _cmd_sweep,
        "diagnose": _cmd_diagnose,
        "budget": _cmd_budget,
        "report": _cmd_report,
    }[args.command]
    return handler(args)


if __name__ == "__main__":
    sys.exit(main())
