"""Initial-data catalog, mollification, and the rough-data recipes.

Rough data is realized as steep-but-resolved profiles: gradients are limited
by what the grid can represent, and the mollification experiments then vary
the smoothing width above the grid scale.  Every recipe returns the triple
(u0, rho0, e0) with e0 computed spectrally from u0 and rho0, so the velocity
gradient / density compatibility relation holds by construction.
"""

from __future__ import annotations

import numpy as np
from scipy.integrate import quad

from .spectral import Field, TorusGrid

__all__ = ["make_initial_data", "mollify", "VacuumError", "CATALOG"]


class VacuumError(RuntimeError):
    """Density touched (or started below) the positivity floor."""


def _derived_e(u0: Field, rho0: Field, alpha: float) -> Field:
    return u0.derivative() - rho0.frac_laplacian(alpha)


def _stationary(grid, params, rng):
    u = Field.constant(grid, float(params.get("u_const", 0.0)))
    rho = Field.constant(grid, float(params.get("rho_const", 1.0)))
    return u, rho


def _smooth_decay(grid, params, rng):
    a = float(params.get("rho_amp", 0.5))
    b = float(params.get("u_amp", 1.0))
    u = Field.from_function(grid, lambda x: b * np.sin(x))
    rho = Field.from_function(grid, lambda x: 1.0 + a * np.cos(x))
    return u, rho


def _sawtooth_u(grid, modes: int, amp: float) -> Field:
    def f(x):
        out = np.zeros_like(x)
        for k in range(1, modes + 1):
            out += np.sin(k * x) / k
        return amp * out

    return Field.from_function(grid, f)


def _steep_tanh(grid, params, rng):
    amp = float(params.get("amp", 0.5))
    width = float(params.get("width", 0.05))
    u_kind = str(params.get("u_kind", "sin"))
    rho = Field.from_function(grid, lambda x: 1.0 + amp * np.tanh(np.sin(x) / width))
    if u_kind == "sawtooth":
        u = _sawtooth_u(grid, int(params.get("u_modes", 24)), float(params.get("u_amp", 0.5)))
    else:
        u = Field.from_function(grid, lambda x: float(params.get("u_amp", 1.0)) * np.sin(x))
    return u, rho


def _random_modes(grid, params, rng):
    kmax = int(params.get("kmax", 8))
    decay = float(params.get("decay", 2.0))
    amp = float(params.get("amp", 0.3))
    base = float(params.get("rho_base", 1.0))

    def draw():
        out = np.zeros(grid.n_points)
        for k in range(1, kmax + 1):
            a, b = rng.standard_normal(2) / k ** decay
            out += a * np.cos(k * grid.nodes) + b * np.sin(k * grid.nodes)
        m = np.max(np.abs(out))
        return out * (amp / m if m > 0 else 1.0)

    u = Field(grid, draw())
    rho = Field(grid, base + draw())
    return u, rho


CATALOG = {
    "stationary": _stationary,
    "smooth_decay": _smooth_decay,
    "steep_tanh": _steep_tanh,
    "random_modes": _random_modes,
}


def make_initial_data(grid: TorusGrid, alpha: float, recipe: str, params: dict | None = None,
                      seed: int | None = None, floor: float = 1e-3):
    """Build (u0, rho0, e0) from a named catalog recipe.

    Raises :class:`VacuumError` if the recipe produces a density below the
    configured floor.  The compatibility residual of the returned triple is
    zero to rounding by construction.
    """
    if recipe not in CATALOG:
        raise ValueError(f"unknown initial-data recipe {recipe!r}; have {sorted(CATALOG)}")
    rng = np.random.default_rng(seed)
    u0, rho0 = CATALOG[recipe](grid, params or {}, rng)
    if float(np.min(rho0.samples)) < floor:
        raise VacuumError(
            f"recipe {recipe!r} violates the density floor: min rho0 = "
            f"{float(np.min(rho0.samples)):.3e} < {floor:.3e}"
        )
    return u0, rho0, _derived_e(u0, rho0, alpha)


# ---------------------------------------------------------------------------
# mollification
# ---------------------------------------------------------------------------

def _bump_normalizer() -> float:
    val, _ = quad(lambda s: np.exp(-1.0 / (1.0 - s * s)), -1.0, 1.0, epsabs=1e-14)
    return 1.0 / val


_BUMP_Z = _bump_normalizer()


def mollify(field: Field, eps: float) -> Field:
    """Convolution with the standard compactly supported bump of width eps.

    The kernel Z*exp(-1/(1-(x/eps)^2))/eps is sampled on the grid and its
    discrete weights renormalized to unit mass, so constants (and the total
    mass of a density) are preserved exactly.  eps = 0 is the identity.
    """
    if eps < 0:
        raise ValueError("eps must be >= 0")
    if eps == 0.0:
        return field
    grid = field.grid
    n = grid.n_points
    # signed periodic offsets of each node from 0
    x = grid.nodes.copy()
    x[x > np.pi] -= 2.0 * np.pi
    kernel = np.zeros(n)
    inside = np.abs(x) < eps
    s = x[inside] / eps
    kernel[inside] = (_BUMP_Z / eps) * np.exp(-1.0 / (1.0 - s * s))
    total = np.sum(kernel)
    if total <= 0.0:
        raise ValueError(f"mollifier width eps={eps} is below the grid resolution")
    kernel /= total  # discrete weights summing to one: constants survive exactly
    out = np.real(np.fft.ifft(np.fft.fft(field.samples) * np.fft.fft(kernel)))
    return Field(grid, out)
