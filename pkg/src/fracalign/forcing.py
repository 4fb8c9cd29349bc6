"""External force catalog.

A :class:`ForceSpec` bundles analytic evaluators for f, f' and f'' (supplied
together so the solver and the bound constants never differentiate the force
numerically), the end of its temporal support when compact, and exact sup
norms of f and f' used by the explicit bound constants.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

__all__ = ["ForceSpec", "zero_force", "time_bump_force", "trig_force", "force_from_config"]


@dataclass(frozen=True)
class ForceSpec:
    kind: str
    f: Callable
    f_x: Callable
    f_xx: Callable
    support_end: float | None = None
    sup_f: float = 0.0
    sup_f_prime: float = 0.0
    params: dict = field(default_factory=dict, compare=False)

    @property
    def is_zero(self) -> bool:
        return self.kind == "zero"

    def active(self, t: float) -> bool:
        return not self.is_zero and (self.support_end is None or t < self.support_end)


def zero_force() -> ForceSpec:
    z = lambda x, t: np.zeros_like(np.asarray(x, dtype=float))
    return ForceSpec(kind="zero", f=z, f_x=z, f_xx=z, support_end=0.0)


def _time_bump(t: float, center: float, width: float) -> float:
    """Smooth bump in time, peak value 1 at t = center, support (c-w, c+w)."""
    s = (t - center) / width
    if abs(s) >= 1.0:
        return 0.0
    return float(np.exp(1.0 - 1.0 / (1.0 - s * s)))


def time_bump_force(amplitude: float, mode: int, center: float, width: float,
                    phase: float = 0.0) -> ForceSpec:
    """f(x,t) = A * bump((t-c)/w) * sin(m x + phase); compact support in time.

    Sup norms are exact: the bump peaks at 1, so ||f|| = A, ||f'|| = A*m.
    """
    A, m = float(amplitude), int(mode)

    def f(x, t):
        return A * _time_bump(t, center, width) * np.sin(m * np.asarray(x) + phase)

    def f_x(x, t):
        return A * m * _time_bump(t, center, width) * np.cos(m * np.asarray(x) + phase)

    def f_xx(x, t):
        return -A * m * m * _time_bump(t, center, width) * np.sin(m * np.asarray(x) + phase)

    return ForceSpec(
        kind="time_bump", f=f, f_x=f_x, f_xx=f_xx,
        support_end=center + width,
        sup_f=abs(A), sup_f_prime=abs(A * m),
        params={"amplitude": A, "mode": m, "center": center, "width": width, "phase": phase},
    )


def trig_force(amplitude: float, mode: int, omega: float, phase: float = 0.0) -> ForceSpec:
    """Steady oscillatory force A cos(omega t) sin(m x + phase) (no support end)."""
    A, m = float(amplitude), int(mode)

    def f(x, t):
        return A * np.cos(omega * t) * np.sin(m * np.asarray(x) + phase)

    def f_x(x, t):
        return A * m * np.cos(omega * t) * np.cos(m * np.asarray(x) + phase)

    def f_xx(x, t):
        return -A * m * m * np.cos(omega * t) * np.sin(m * np.asarray(x) + phase)

    return ForceSpec(
        kind="trig", f=f, f_x=f_x, f_xx=f_xx, support_end=None,
        sup_f=abs(A), sup_f_prime=abs(A * m),
        params={"amplitude": A, "mode": m, "omega": omega, "phase": phase},
    )


def force_from_config(name: str, params: dict) -> ForceSpec:
    if name == "zero":
        return zero_force()
    if name == "time_bump":
        return time_bump_force(
            amplitude=float(params.get("amplitude", 0.4)),
            mode=int(params.get("mode", 2)),
            center=float(params.get("center", 0.5)),
            width=float(params.get("width", 0.5)),
            phase=float(params.get("phase", 0.0)),
        )
    if name == "trig":
        return trig_force(
            amplitude=float(params.get("amplitude", 0.2)),
            mode=int(params.get("mode", 1)),
            omega=float(params.get("omega", 1.0)),
            phase=float(params.get("phase", 0.0)),
        )
    raise ValueError(f"unknown force catalog entry: {name!r}")
