"""Fourier collocation machinery on the 2*pi-periodic torus.

Everything downstream (solver, diagnostics, scale-by-scale budgets) is built
on the objects here: a :class:`TorusGrid` carrying the wavenumber bookkeeping,
a :class:`Field` sampling a real function at the equispaced nodes, spectral
differentiation, the fractional dissipation operator as a Fourier multiplier,
sharp dyadic (Littlewood-Paley style) band projections, Besov/Hoelder
seminorms, and zero-padded (dealiased) pointwise products.

Conventions fixed project-wide:

* transforms use the coefficient normalization ``ghat = fft(g)/n`` so that a
  constant field ``c`` has ``ghat[0] == c`` and ``g(x) = sum_k ghat[k] e^{ikx}``;
* the Nyquist wavenumber is zeroed in the derivative and in the fractional
  dissipation multiplier (its sign is ambiguous on an even grid);
* quadrature of a sampled field is the periodic trapezoid rule
  ``dx * sum(samples)``, which is spectrally accurate for smooth integrands.
"""

from __future__ import annotations

import numpy as np

from .kernel import frac_multiplier_constant

__all__ = [
    "TorusGrid",
    "Field",
    "lp_block_bounds",
    "lp_project",
    "lp_low",
    "besov_seminorm",
    "besov_block_norms",
    "holder_seminorm",
    "dealiased_product",
    "GridMismatchError",
]

PERIOD = 2.0 * np.pi


class GridMismatchError(ValueError):
    """Raised when an operation mixes fields living on different grids."""


def _is_power_of_two(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


class TorusGrid:
    """Equispaced collocation grid on [0, 2*pi) with spectral bookkeeping.

    Parameters
    ----------
    n_points:
        Number of collocation nodes; a power of two, at least 16.
    padding_factor:
        Refinement factor used for dealiased products.  The default 2 keeps
        quadratic products exact for full-band inputs and cubic products
        exact for inputs band-limited to ``n_points / 4``.
    """

    def __init__(self, n_points: int, padding_factor: int = 2):
        if not _is_power_of_two(n_points) or n_points < 16:
            raise ValueError(f"n_points must be a power of two >= 16, got {n_points}")
        if padding_factor < 2:
            raise ValueError("padding_factor must be >= 2")
        self.n_points = int(n_points)
        self.padding_factor = int(padding_factor)
        self.period = PERIOD
        self.node_spacing = PERIOD / n_points
        self.nodes = self.node_spacing * np.arange(n_points)
        # signed wavenumbers in FFT layout; the Nyquist bin sits at -n/2
        self.wavenumbers = np.fft.fftfreq(n_points, d=1.0 / n_points)
        self._nyquist_bin = n_points // 2
        self._deriv_mult = 1j * self.wavenumbers
        self._deriv_mult[self._nyquist_bin] = 0.0
        self._frac_mult_cache: dict[float, np.ndarray] = {}
        self.max_block = int(np.log2(n_points // 2))  # Nyquist |k| = 2^max_block

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, TorusGrid)
            and other.n_points == self.n_points
            and other.padding_factor == self.padding_factor
        )

    def __hash__(self):
        return hash((self.n_points, self.padding_factor))

    def __repr__(self):
        return f"TorusGrid(n_points={self.n_points}, padding_factor={self.padding_factor})"

    def frac_multiplier(self, alpha: float) -> np.ndarray:
        """Multiplier array C(alpha)|k|^alpha with the Nyquist bin zeroed."""
        key = float(alpha)
        mult = self._frac_mult_cache.get(key)
        if mult is None:
            c = frac_multiplier_constant(alpha)
            mult = c * np.abs(self.wavenumbers) ** alpha
            mult[self._nyquist_bin] = 0.0
            mult.setflags(write=False)
            self._frac_mult_cache[key] = mult
        return mult

    def frac_half_multiplier(self, alpha: float) -> np.ndarray:
        """Square root of :meth:`frac_multiplier`; pairs to the full operator."""
        return np.sqrt(self.frac_multiplier(alpha))


class Field:
    """A real scalar function sampled on a :class:`TorusGrid`.

    The spectral representation is computed lazily and cached; fields are
    treated as immutable once constructed (operations return new fields).
    """

    __slots__ = ("grid", "samples", "_modes")

    def __init__(self, grid: TorusGrid, samples, modes=None):
        samples = np.asarray(samples, dtype=float)
        if samples.shape != (grid.n_points,):
            raise ValueError(f"expected {grid.n_points} samples, got shape {samples.shape}")
        if not np.all(np.isfinite(samples)):
            raise ValueError("field samples must be finite")
        self.grid = grid
        self.samples = samples
        self._modes = modes

    # -- constructors -------------------------------------------------------

    @classmethod
    def from_function(cls, grid: TorusGrid, func) -> "Field":
        return cls(grid, np.asarray(func(grid.nodes), dtype=float) + np.zeros(grid.n_points))

    @classmethod
    def from_modes(cls, grid: TorusGrid, modes) -> "Field":
        modes = np.asarray(modes, dtype=complex)
        samples = np.fft.ifft(modes * grid.n_points).real
        return cls(grid, samples, modes=modes.copy())

    @classmethod
    def constant(cls, grid: TorusGrid, value: float) -> "Field":
        return cls(grid, np.full(grid.n_points, float(value)))

    # -- spectral access ----------------------------------------------------

    @property
    def modes(self) -> np.ndarray:
        """Fourier coefficients ghat(k), |k| <= n/2, FFT layout, ghat(0) = mean."""
        if self._modes is None:
            self._modes = np.fft.fft(self.samples) / self.grid.n_points
        return self._modes

    def with_multiplier(self, mult: np.ndarray) -> "Field":
        out = np.fft.ifft(self.modes * mult * self.grid.n_points).real
        return Field(self.grid, out)

    # -- calculus -----------------------------------------------------------

    def derivative(self) -> "Field":
        """Spectral d/dx; the Nyquist mode's derivative is set to zero."""
        return self.with_multiplier(self.grid._deriv_mult)

    def frac_laplacian(self, alpha: float) -> "Field":
        """Fractional dissipation operator, multiplier C(alpha)|k|^alpha.

        The output has zero mean by construction (multiplier vanishes at k=0).
        """
        return self.with_multiplier(self.grid.frac_multiplier(alpha))

    def frac_laplacian_half(self, alpha: float) -> "Field":
        """Half-order operator whose square composes to :meth:`frac_laplacian`.

        Used in the symmetrized pairings of the energy budget; note the
        multiplier is sqrt(C(alpha)|k|^alpha), not the alpha/2 multiplier.
        """
        return self.with_multiplier(self.grid.frac_half_multiplier(alpha))

    def quadrature(self) -> float:
        """Integral over the torus (periodic trapezoid rule)."""
        return float(self.grid.node_spacing * np.sum(self.samples))

    def mean(self) -> float:
        return float(np.mean(self.samples))

    # -- pointwise helpers (no dealiasing; use dealiased_product for products)

    def __add__(self, other):
        if isinstance(other, Field):
            self._check_grid(other)
            return Field(self.grid, self.samples + other.samples)
        return Field(self.grid, self.samples + float(other))

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, Field):
            self._check_grid(other)
            return Field(self.grid, self.samples - other.samples)
        return Field(self.grid, self.samples - float(other))

    def __rsub__(self, other):
        return Field(self.grid, float(other) - self.samples)

    def __mul__(self, scalar):
        return Field(self.grid, self.samples * float(scalar))

    __rmul__ = __mul__

    def __neg__(self):
        return Field(self.grid, -self.samples)

    def _check_grid(self, other: "Field"):
        if other.grid != self.grid:
            raise GridMismatchError(f"grids differ: {self.grid} vs {other.grid}")

    def inf_norm(self) -> float:
        return float(np.max(np.abs(self.samples)))

    def __repr__(self):
        return f"Field(n={self.grid.n_points}, inf={self.inf_norm():.3g})"


# ---------------------------------------------------------------------------
# dyadic band projections
# ---------------------------------------------------------------------------

def lp_block_bounds(q: int) -> tuple[int, int]:
    """Half-open wavenumber range [lo, hi) of dyadic block q; block -1 is {0}."""
    if q < -1:
        raise ValueError("block index must be >= -1")
    if q == -1:
        return (0, 1)
    return (2 ** q, 2 ** (q + 1))


def _block_mask(grid: TorusGrid, q: int) -> np.ndarray:
    lo, hi = lp_block_bounds(q)
    absk = np.abs(grid.wavenumbers)
    return (absk >= lo) & (absk < hi)


def lp_project(field: Field, q: int) -> Field:
    """Sharp Fourier restriction of the field to dyadic block q.

    Block -1 carries the mean mode; block q >= 0 carries 2^q <= |k| < 2^{q+1}.
    The blocks partition the resolved modes exactly.
    """
    modes = np.where(_block_mask(field.grid, q), field.modes, 0.0)
    return Field.from_modes(field.grid, modes)


def lp_low(field: Field, Q: int) -> Field:
    """Low-pass sum of blocks -1..Q (sharp cutoff at |k| < 2^{Q+1})."""
    if Q < -1:
        raise ValueError("cutoff block must be >= -1")
    hi = 1 if Q == -1 else 2 ** (Q + 1)
    mask = np.abs(field.grid.wavenumbers) < hi
    return Field.from_modes(field.grid, np.where(mask, field.modes, 0.0))


# ---------------------------------------------------------------------------
# seminorms
# ---------------------------------------------------------------------------

def _lp_norm(samples: np.ndarray, dx: float, p: float) -> float:
    if np.isinf(p):
        return float(np.max(np.abs(samples)))
    return float((dx * np.sum(np.abs(samples) ** p)) ** (1.0 / p))


def besov_block_norms(field: Field, p: float) -> np.ndarray:
    """L^p norms of the dyadic blocks, q = -1 .. max resolved block."""
    dx = field.grid.node_spacing
    return np.array(
        [_lp_norm(lp_project(field, q).samples, dx, p) for q in range(-1, field.grid.max_block + 1)]
    )


def besov_seminorm(field: Field, s: float, p: float, r: float) -> float:
    """Dyadic-block seminorm || 2^{qs} ||g_q||_p ||_{l^r} over resolved blocks."""
    if p < 1 or (not np.isinf(r) and r < 1):
        raise ValueError("p and r must be >= 1 (or infinity)")
    norms = besov_block_norms(field, p)
    lam = 2.0 ** np.arange(-1, field.grid.max_block + 1)
    weighted = lam ** s * norms
    if np.isinf(r):
        return float(np.max(weighted))
    return float(np.sum(weighted ** r) ** (1.0 / r))


def _lag_maxima(samples: np.ndarray) -> np.ndarray:
    """max_j |g(x_j) - g(x_{j+l})| for every lag l = 1..n/2."""
    n = samples.size
    lags = np.arange(1, n // 2 + 1)
    idx = (np.arange(n)[None, :] + lags[:, None]) % n
    return np.max(np.abs(samples[None, :] - samples[idx]), axis=1)


def holder_seminorm(field: Field, gamma: float, _maxima: np.ndarray | None = None) -> float:
    """Discrete C^gamma seminorm: sup over all node pairs with periodic distance.

    O(n^2), shared across gamma values via the precomputed per-lag maxima.
    """
    if not 0.0 < gamma <= 1.0:
        raise ValueError("gamma must lie in (0, 1]")
    n = field.grid.n_points
    maxima = _lag_maxima(field.samples) if _maxima is None else _maxima
    lags = np.arange(1, n // 2 + 1) * field.grid.node_spacing
    dist = np.minimum(lags, PERIOD - lags)
    return float(np.max(maxima / dist ** gamma))


# ---------------------------------------------------------------------------
# dealiased products
# ---------------------------------------------------------------------------

def _pad_samples(field: Field) -> np.ndarray:
    """Samples of the trigonometric interpolant on the refined grid."""
    n = field.grid.n_points
    m = field.grid.padding_factor * n
    half = n // 2
    padded = np.zeros(m, dtype=complex)
    modes = field.modes
    padded[: half] = modes[: half]
    padded[m - half + 1:] = modes[n - half + 1:]
    # split the coarse Nyquist bin symmetrically to keep the interpolant real
    padded[half] = 0.5 * modes[half]
    padded[m - half] = 0.5 * modes[half]
    return np.fft.ifft(padded * m).real


def _truncate_samples(grid: TorusGrid, fine: np.ndarray) -> Field:
    """Project fine-grid samples onto the coarse grid's resolved band."""
    n = grid.n_points
    m = fine.size
    half = n // 2
    modes_fine = np.fft.fft(fine) / m
    modes = np.zeros(n, dtype=complex)
    modes[: half] = modes_fine[: half]
    modes[n - half + 1:] = modes_fine[m - half + 1:]
    # fold the two fine-grid Nyquist bins into the coarse one (sampling identity)
    modes[half] = modes_fine[half] + modes_fine[m - half]
    return Field.from_modes(grid, modes)


def dealiased_product(a: Field, b: Field, c: Field | None = None) -> Field:
    """Pointwise product computed alias-free on the padded grid, then truncated.

    Exact (a projection of the true product) for band-limited inputs whose
    product fits the padded band; quadratic products are always exact with
    the default padding factor.
    """
    a._check_grid(b)
    fine = _pad_samples(a) * _pad_samples(b)
    if c is not None:
        a._check_grid(c)
        fine = fine * _pad_samples(c)
    return _truncate_samples(a.grid, fine)
