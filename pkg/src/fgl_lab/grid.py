"""Periodic pseudospectral grid, field states, and Fourier-multiplier operators.

The domain is the torus [-L, L)^n sampled at N points per axis.  Fourier
multipliers act exactly on the discrete frequency set k_j = j*pi/L,
j = -N/2 .. N/2-1, so band-limited eigenfunctions are reproduced to
round-off.  All norms use the rectangle rule, which is spectrally accurate
for smooth periodic integrands.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import CorruptFieldError


@dataclass(frozen=True)
class GridSpec:
    """Uniform periodic grid on [-half_length, half_length)^dim.

    Parameters
    ----------
    half_length : float
        Half the period, L > 0.  Nodes run from -L to L - dx.
    points : int
        Number of nodes per axis, even and >= 4.
    dim : int, optional
        Spatial dimension (1 by default; 2 is supported by the data
        model but quantitative claims in this package are 1-d).
    """

    half_length: float
    points: int
    dim: int = 1

    def __post_init__(self):
        if not np.isfinite(self.half_length) or self.half_length <= 0:
            raise ValueError("Grid half_length must be positive and finite")
        if self.points % 2 != 0:
            raise ValueError("Grid resolution points must be even")
        if self.points < 4:
            raise ValueError("Grid resolution points must be at least 4")
        if self.dim < 1:
            raise ValueError("Grid dimension must be >= 1")

    @property
    def dx(self) -> float:
        return 2.0 * self.half_length / self.points

    @property
    def cell_volume(self) -> float:
        return self.dx**self.dim

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.points,) * self.dim

    @cached_property
    def nodes(self) -> np.ndarray:
        """1-d array of node coordinates along one axis."""
        return -self.half_length + self.dx * np.arange(self.points)

    @cached_property
    def axis_frequencies(self) -> np.ndarray:
        """Angular frequencies k_j = j*pi/L along one axis, FFT ordering."""
        return 2.0 * np.pi * np.fft.fftfreq(self.points, d=self.dx)

    @cached_property
    def abs_wavenumber(self) -> np.ndarray:
        """|k| on the full frequency lattice (shape == self.shape)."""
        k = self.axis_frequencies
        if self.dim == 1:
            return np.abs(k)
        axes = np.meshgrid(*([k] * self.dim), indexing="ij", sparse=True)
        return np.sqrt(sum(a**2 for a in axes))

    @cached_property
    def radius(self) -> np.ndarray:
        """|x| on the physical lattice (shape == self.shape)."""
        x = self.nodes
        if self.dim == 1:
            return np.abs(x)
        axes = np.meshgrid(*([x] * self.dim), indexing="ij", sparse=True)
        return np.sqrt(sum(a**2 for a in axes))

    def coordinates(self) -> tuple[np.ndarray, ...]:
        """Broadcastable coordinate arrays, one per axis."""
        return tuple(
            np.meshgrid(*([self.nodes] * self.dim), indexing="ij", sparse=True)
        )


def make_grid(half_length: float, points: int, dim: int = 1) -> GridSpec:
    """Construct a validated GridSpec."""
    return GridSpec(half_length=float(half_length), points=int(points), dim=int(dim))


@dataclass(frozen=True, eq=False)
class FieldState:
    """A complex field sampled on a GridSpec, with value semantics.

    The sample array is copied on construction and marked read-only;
    operations return new states.  Non-finite entries are representable
    (they signal a corrupt state) but are rejected by every operator.
    """

    grid: GridSpec
    values: np.ndarray

    def __post_init__(self):
        vals = np.array(self.values, dtype=np.complex128, copy=True)
        if vals.shape != self.grid.shape:
            raise ValueError(
                f"field shape {vals.shape} does not match grid shape {self.grid.shape}"
            )
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @property
    def is_finite(self) -> bool:
        return bool(np.isfinite(self.values).all())

    def distance(self, other: "FieldState") -> float:
        """Max-norm distance to another field on the same grid."""
        if self.grid != other.grid:
            raise ValueError("fields live on different grids")
        return float(np.max(np.abs(self.values - other.values)))


def field_from_function(grid: GridSpec, fn) -> FieldState:
    """Sample a callable of the coordinate arrays onto the grid."""
    return FieldState(grid, np.asarray(fn(*grid.coordinates()), dtype=np.complex128))


def _require_finite(values: np.ndarray) -> None:
    if not np.isfinite(values).all():
        raise CorruptFieldError("field contains NaN or Inf")


# ----------------------------------------------------------------------
# Fourier multipliers


def fractional_symbol(grid: GridSpec, s: float) -> np.ndarray:
    """Symbol of |D|^s, the fractional half-Laplacian power, s > 0."""
    if s <= 0:
        raise ValueError("fractional exponent s must be positive")
    return grid.abs_wavenumber**s


def half_wave_phase_symbol(grid: GridSpec, t: float) -> np.ndarray:
    """Unit-modulus symbol e^{-i|k|t} of the free half-wave propagator."""
    return np.exp(-1j * t * grid.abs_wavenumber)


def gradient_symbol(grid: GridSpec, axis: int = 0) -> np.ndarray:
    """Symbol i*k_axis of the partial derivative, unpaired mode zeroed.

    The j = -N/2 frequency has no conjugate partner, so it is dropped
    from the antisymmetric symbol; this keeps derivatives of real data
    real.
    """
    k = grid.axis_frequencies.copy()
    k[grid.points // 2] = 0.0
    if grid.dim == 1:
        return 1j * k
    shape = [1] * grid.dim
    shape[axis] = grid.points
    full = np.zeros(grid.shape, dtype=np.complex128)
    full += 1j * k.reshape(shape)
    return full


def apply_multiplier(f: FieldState, symbol: np.ndarray) -> FieldState:
    """Apply a Fourier multiplier given by its symbol on the frequency lattice."""
    _require_finite(f.values)
    spec = np.fft.fftn(f.values)
    return FieldState(f.grid, np.fft.ifftn(spec * symbol))


def apply_fractional(f: FieldState, s: float) -> FieldState:
    """Apply |D|^s."""
    return apply_multiplier(f, fractional_symbol(f.grid, s))


def apply_gradient(f: FieldState, axis: int = 0) -> FieldState:
    """Apply the spectral partial derivative along one axis."""
    return apply_multiplier(f, gradient_symbol(f.grid, axis))


def apply_half_wave(f: FieldState, t: float) -> FieldState:
    """Apply the free propagator e^{-i|D|t} (mass-preserving for any t)."""
    return apply_multiplier(f, half_wave_phase_symbol(f.grid, t))


# ----------------------------------------------------------------------
# Norms (rectangle-rule quadrature)


def l2_norm(f: FieldState) -> float:
    _require_finite(f.values)
    return float(np.sqrt(f.grid.cell_volume * np.sum(np.abs(f.values) ** 2)))


def spectral_l2_norm(f: FieldState) -> float:
    """L2 norm computed from Fourier coefficients (Parseval route)."""
    _require_finite(f.values)
    coeffs = np.fft.fftn(f.values)
    total = f.values.size
    return float(np.sqrt(f.grid.cell_volume / total * np.sum(np.abs(coeffs) ** 2)))


def lp_norm(f: FieldState, q: float) -> float:
    """L^q norm; in the evolution diagnostics q = p + 1."""
    if q < 1:
        raise ValueError("Lebesgue exponent must be >= 1")
    _require_finite(f.values)
    return float((f.grid.cell_volume * np.sum(np.abs(f.values) ** q)) ** (1.0 / q))


def sup_norm(f: FieldState) -> float:
    _require_finite(f.values)
    return float(np.max(np.abs(f.values)))


def h1_norm(f: FieldState) -> float:
    """Sobolev norm sqrt(||f||_2^2 + ||grad f||_2^2)."""
    _require_finite(f.values)
    coeffs = np.fft.fftn(f.values)
    total = f.values.size
    weight = f.grid.cell_volume / total
    base = np.sum(np.abs(coeffs) ** 2)
    grad = 0.0
    k = f.grid.axis_frequencies.copy()
    k[f.grid.points // 2] = 0.0
    for axis in range(f.grid.dim):
        shape = [1] * f.grid.dim
        shape[axis] = f.grid.points
        grad += np.sum((k.reshape(shape) ** 2) * np.abs(coeffs) ** 2)
    return float(np.sqrt(weight * (base + grad)))


def norm(f: FieldState, kind: str, q: float | None = None) -> float:
    """Dispatch on norm kind: 'l2', 'lp' (requires exponent q), 'h1', 'sup'."""
    if kind == "l2":
        return l2_norm(f)
    if kind == "lp":
        if q is None:
            raise ValueError("kind='lp' requires the exponent q")
        return lp_norm(f, q)
    if kind == "h1":
        return h1_norm(f)
    if kind == "sup":
        return sup_norm(f)
    raise ValueError(f"unknown norm kind {kind!r}")
