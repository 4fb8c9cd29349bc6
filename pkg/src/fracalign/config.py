"""Flat key = value configuration files.

One assignment per line, ``#`` starts a comment, keys are dotted to group
catalog parameters (``init.*`` for initial data, ``force.*`` for the force,
``check.*`` to toggle named checks).  Values are parsed as int, float, bool
or bare string.  Documented keys:

    scenario            optional name echoed into the result summary
    n_points            grid size (power of two, >= 16)
    alpha               dissipation order in (0, 2)
    t_end               final time
    cfl_number          CFL fraction (default 0.4)
    output_interval     snapshot spacing in time units
    padding_factor      dealiasing refinement (default 2)
    initial_data        catalog recipe name
    init.<param>        recipe parameters (e.g. init.width = 0.05)
    force               force catalog name (default zero)
    force.<param>       force parameters
    seed                RNG seed for randomized recipes
    rho_floor           admissible initial density minimum
    evolve_e            evolve the conservation-law copy of e (cross-check)
    dt_fixed            fixed time step override
    gammas              comma list of Hoelder exponents (default 0.1,0.25)
    checks              comma list of enabled checks, or 'all' / 'none'
    budget              run the dyadic budget sweep (bool)
    q_list              comma list of cutoff blocks (default resolved sweep)
    eps_list            mollification widths (mollification experiment)
    compare_times       comparison times for the mollification experiment
    perturbation        perturbation size(s) for the two-run stability study
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from .dynamics import SimConfig

__all__ = ["ConfigError", "ScenarioSpec", "parse_config_text", "load_config"]


class ConfigError(ValueError):
    """Malformed configuration; message carries file/line context."""


_KNOWN_CHECKS = (
    "conservation", "energy_law", "rho_energy_law", "dissipation_oracle",
    "density_bounds", "q_bounds", "velocity_bound", "e_bound",
    "alignment", "budget_closure", "onsager_trends", "holder_scaling",
    "flocking", "no_blowup", "compatibility",
)


def _coerce(raw: str):
    s = raw.strip()
    low = s.lower()
    if low in ("true", "yes", "on"):
        return True
    if low in ("false", "no", "off"):
        return False
    try:
        return int(s)
    except ValueError:
        pass
    try:
        return float(s)
    except ValueError:
        pass
    return s


def _float_list(value) -> list[float]:
    if isinstance(value, (int, float)):
        return [float(value)]
    return [float(v) for v in str(value).split(",") if v.strip()]


@dataclass
class ScenarioSpec:
    """A parsed configuration: solver settings plus enabled checks."""

    sim: SimConfig
    name: str = "scenario"
    checks: list[str] = field(default_factory=list)
    gammas: tuple = (0.1, 0.25)
    budget: bool = False
    q_list: list[int] | None = None
    eps_list: list[float] = field(default_factory=list)
    compare_times: list[float] = field(default_factory=list)
    perturbation: list[float] = field(default_factory=list)
    raw: dict = field(default_factory=dict)


def parse_config_text(text: str, source: str = "<config>") -> ScenarioSpec:
    entries: dict[str, object] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {line.strip()!r}")
        key, _, value = body.partition("=")
        key = key.strip()
        if not key:
            raise ConfigError(f"{source}:{lineno}: empty key")
        if key in entries:
            raise ConfigError(f"{source}:{lineno}: duplicate key {key!r}")
        entries[key] = _coerce(value)

    def group(prefix: str) -> dict:
        return {k.split(".", 1)[1]: v for k, v in entries.items() if k.startswith(prefix + ".")}

    try:
        sim = SimConfig(
            n_points=int(entries.get("n_points", 256)),
            alpha=float(entries.get("alpha", 1.0)),
            t_end=float(entries.get("t_end", 1.0)),
            cfl_number=float(entries.get("cfl_number", 0.4)),
            output_interval=float(entries.get("output_interval", 0.01)),
            padding_factor=int(entries.get("padding_factor", 2)),
            initial_data=str(entries.get("initial_data", "smooth_decay")),
            initial_params=group("init"),
            force_name=str(entries.get("force", "zero")),
            force_params=group("force"),
            seed=int(entries["seed"]) if "seed" in entries else None,
            rho_floor=float(entries.get("rho_floor", 1e-3)),
            evolve_e_cross_check=bool(entries.get("evolve_e", False)),
            dt_fixed=float(entries["dt_fixed"]) if "dt_fixed" in entries else None,
        )
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"{source}: {exc}") from exc

    checks_raw = str(entries.get("checks", "none")).strip()
    if checks_raw in ("all",):
        checks = list(_KNOWN_CHECKS)
    elif checks_raw in ("none", ""):
        checks = []
    else:
        checks = [c.strip() for c in checks_raw.split(",") if c.strip()]
        unknown = [c for c in checks if c not in _KNOWN_CHECKS]
        if unknown:
            raise ConfigError(f"{source}: unknown checks {unknown}; known: {_KNOWN_CHECKS}")
    # per-check toggles: check.<name> = on/off
    for name, val in group("check").items():
        if name not in _KNOWN_CHECKS:
            raise ConfigError(f"{source}: unknown check {name!r}")
        if val and name not in checks:
            checks.append(name)
        if not val and name in checks:
            checks.remove(name)

    gammas = tuple(_float_list(entries.get("gammas", "0.1,0.25")))
    q_list = None
    if "q_list" in entries:
        q_list = [int(v) for v in _float_list(entries["q_list"])]
    return ScenarioSpec(
        sim=sim,
        name=str(entries.get("scenario", "scenario")),
        checks=checks,
        gammas=gammas,
        budget=bool(entries.get("budget", False)),
        q_list=q_list,
        eps_list=_float_list(entries.get("eps_list", "")),
        compare_times=_float_list(entries.get("compare_times", "")),
        perturbation=_float_list(entries.get("perturbation", "")),
        raw=entries,
    )


def load_config(path) -> ScenarioSpec:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config_text(text, source=str(path))
