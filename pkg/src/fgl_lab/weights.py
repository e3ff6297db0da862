"""Polynomial bracket weights and the operators built from them.

The weight family is h(x) = (1 + |x/R|^2)^{s/2}, i.e. <x/R>^s.  Two
operators matter:

* the weighted commutator  A f = (1/h) [|D|, h] f = (1/h)|D|(h f) - |D| f,
  whose operator norm kappa drives every blow-up bound, and
* the smoothing kernel     K f(x) = (1/h(x)) int <x-y>^{-(n+1)} h(y) f(y) dy,
  which controls the commutator in the analysis (1-d here).

kappa is estimated matrix-free by block power iteration on A*A; A itself
is not self-adjoint, A*A is.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .errors import ConvergenceError
from .grid import FieldState, GridSpec, _require_finite


@dataclass(frozen=True)
class WeightSpec:
    """Bracket weight <x/scale>^exponent.

    exponent = 0 degenerates to h == 1; it is allowed so the vanishing
    commutator and non-decaying-tail edge cases stay constructible.
    """

    exponent: float = 1.0
    scale: float = 1.0

    def __post_init__(self):
        if self.exponent < 0 or not math.isfinite(self.exponent):
            raise ValueError("weight exponent must be finite and >= 0")
        if self.scale <= 0 or not math.isfinite(self.scale):
            raise ValueError("weight scale must be positive and finite")

    def h(self, r):
        """Evaluate h at radius/coordinate values (scalar or array)."""
        r = np.asarray(r, dtype=float)
        out = (1.0 + (r / self.scale) ** 2) ** (self.exponent / 2.0)
        return float(out) if out.ndim == 0 else out

    @property
    def label(self) -> str:
        return f"bracket_s{self.exponent:g}_R{self.scale:g}"

    def rescaled(self, factor: float) -> "WeightSpec":
        return WeightSpec(exponent=self.exponent, scale=self.scale * factor)


def weight_values(w: WeightSpec, grid: GridSpec) -> np.ndarray:
    """h sampled on the grid as a real array."""
    return w.h(grid.radius)


def inv_weight_values(w: WeightSpec, grid: GridSpec) -> np.ndarray:
    return 1.0 / weight_values(w, grid)


def eval_weight(w: WeightSpec, grid: GridSpec, which: str = "h") -> FieldState:
    """Sample h (which='h') or 1/h (which='inv') as a FieldState."""
    if which == "h":
        vals = weight_values(w, grid)
    elif which == "inv":
        vals = inv_weight_values(w, grid)
    else:
        raise ValueError(f"unknown weight evaluation {which!r}")
    return FieldState(grid, vals.astype(np.complex128))


def inv_h_tail_integrable(w: WeightSpec, grid: GridSpec) -> bool:
    """Whether 1/h^2 is integrable on the ambient space R^dim."""
    return 2.0 * w.exponent > grid.dim


def norm_inv_h(w: WeightSpec, grid: GridSpec, tail_correction: bool = True) -> float:
    """L2 norm of 1/h: grid quadrature plus, in 1-d, the analytic tail.

    The grid only sees [-L, L); for slowly decaying weights the tail
    int_{|x|>L} h^{-2} dx is a visible fraction of the total, so it is
    added by adaptive quadrature whenever 1/h^2 is integrable.  When it
    is not (2s <= dim), the truncated value is returned as-is and the
    caller should treat it as L-dependent.
    """
    vals = inv_weight_values(w, grid)
    total = grid.cell_volume * float(np.sum(vals**2))
    if tail_correction and grid.dim == 1 and inv_h_tail_integrable(w, grid):
        s, r = w.exponent, w.scale
        tail, _ = quad(
            lambda x: (1.0 + (x / r) ** 2) ** (-s), grid.half_length, np.inf
        )
        total += 2.0 * tail
    return math.sqrt(total)


# ----------------------------------------------------------------------
# Weighted commutator A = (1/h)[|D|, h] and its adjoint


def _commutator_closures(w: WeightSpec, grid: GridSpec):
    """Raw-array apply/adjoint closures for the commutator on this grid."""
    h = weight_values(w, grid)
    inv_h = 1.0 / h
    absk = grid.abs_wavenumber
    shape = grid.shape

    def apply_a(vec: np.ndarray) -> np.ndarray:
        f = vec.reshape(shape)
        df = np.fft.ifftn(np.fft.fftn(f) * absk)
        dhf = np.fft.ifftn(np.fft.fftn(h * f) * absk)
        return (inv_h * dhf - df).ravel()

    def apply_a_star(vec: np.ndarray) -> np.ndarray:
        g = vec.reshape(shape)
        dg = np.fft.ifftn(np.fft.fftn(g) * absk)
        dg_over_h = np.fft.ifftn(np.fft.fftn(inv_h * g) * absk)
        return (h * dg_over_h - dg).ravel()

    return apply_a, apply_a_star


def apply_commutator(
    w: WeightSpec, grid: GridSpec, f: FieldState, adjoint: bool = False
) -> FieldState:
    """Apply A (or A* with adjoint=True) to a field.

    A* g = h |D|(g/h) - |D| g, the exact adjoint of A in the discrete
    L2 inner product because |D| is self-adjoint and h is real.
    """
    _require_finite(f.values)
    if f.grid != grid:
        raise ValueError("field does not live on the supplied grid")
    apply_a, apply_a_star = _commutator_closures(w, grid)
    op = apply_a_star if adjoint else apply_a
    return FieldState(grid, op(f.values.ravel()).reshape(grid.shape))


def _top_singular_value(
    apply_op,
    apply_adjoint,
    n_dofs: int,
    tol: float,
    max_iter: int,
    seed: int,
    block: int = 2,
) -> tuple[float, int, float]:
    """Largest singular value by block power iteration on the normal operator.

    Convergence: the top Ritz value changes by < tol (relative) on two
    consecutive sweeps.  A block of 2 protects against the near-degenerate
    even/odd pairs that symmetric weights produce.
    """
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((n_dofs, block)) + 1j * rng.standard_normal(
        (n_dofs, block)
    )
    x, _ = np.linalg.qr(x)
    sigma = 0.0
    residual = math.inf
    hits = 0
    for it in range(1, max_iter + 1):
        y = np.column_stack([apply_op(x[:, j]) for j in range(x.shape[1])])
        gram = y.conj().T @ y
        lam = max(float(np.max(np.linalg.eigvalsh(gram))), 0.0)
        new_sigma = math.sqrt(lam)
        if new_sigma < 1e-300:
            return 0.0, it, 0.0
        residual = abs(new_sigma - sigma) / new_sigma
        sigma = new_sigma
        if residual < tol:
            hits += 1
            if hits >= 2:
                return sigma, it, residual
        else:
            hits = 0
        z = np.column_stack([apply_adjoint(y[:, j]) for j in range(y.shape[1])])
        x, _ = np.linalg.qr(z)
    raise ConvergenceError(
        f"power iteration did not converge in {max_iter} sweeps "
        f"(last residual {residual:.3e})"
    )


@dataclass(frozen=True)
class CommutatorEstimate:
    """Converged operator-norm estimate of the weighted commutator."""

    kappa: float
    iterations: int
    residual: float
    grid: GridSpec
    weight: WeightSpec


def estimate_kappa(
    w: WeightSpec,
    grid: GridSpec,
    tol: float = 1e-8,
    max_iter: int = 10000,
    seed: int = 0,
    block: int = 2,
) -> CommutatorEstimate:
    """Estimate kappa = ||(1/h)[|D|, h]|| by power iteration on A*A."""
    apply_a, apply_a_star = _commutator_closures(w, grid)
    n_dofs = int(np.prod(grid.shape))
    kappa, iters, res = _top_singular_value(
        apply_a, apply_a_star, n_dofs, tol=tol, max_iter=max_iter, seed=seed,
        block=block,
    )
    return CommutatorEstimate(
        kappa=kappa, iterations=iters, residual=res, grid=grid, weight=w
    )


# ----------------------------------------------------------------------
# Smoothing kernel operator (1-d)


def weighted_kernel_matrix(
    w: WeightSpec, grid: GridSpec, max_points: int = 4096
) -> np.ndarray:
    """Dense matrix of K f(x) = (1/h(x)) sum_y <x-y>^{-2} h(y) f(y) dx.

    Uses the true line distance x - y on the truncated domain, not the
    torus distance, mirroring the ambient-space operator.
    """
    if grid.dim != 1:
        raise ValueError("the smoothing kernel operator is implemented in 1-d only")
    if grid.points > max_points:
        raise ValueError(
            f"grid has {grid.points} points, above the dense-kernel cap {max_points}"
        )
    x = grid.nodes
    h = weight_values(w, grid)
    diff = x[:, None] - x[None, :]
    kernel = 1.0 / (1.0 + diff**2)
    return grid.dx * (1.0 / h)[:, None] * kernel * h[None, :]


def apply_weighted_kernel(
    w: WeightSpec, grid: GridSpec, f: FieldState, max_points: int = 4096
) -> FieldState:
    """Apply the smoothing kernel operator to a field."""
    _require_finite(f.values)
    mat = weighted_kernel_matrix(w, grid, max_points=max_points)
    return FieldState(grid, mat @ f.values)


def estimate_weighted_kernel_norm(
    w: WeightSpec,
    grid: GridSpec,
    tol: float = 1e-8,
    max_iter: int = 10000,
    seed: int = 0,
    max_points: int = 4096,
) -> float:
    """Operator norm of the smoothing kernel by power iteration on K*K."""
    mat = weighted_kernel_matrix(w, grid, max_points=max_points)
    sigma, _, _ = _top_singular_value(
        lambda v: mat @ v,
        lambda v: mat.T @ v,
        grid.points,
        tol=tol,
        max_iter=max_iter,
        seed=seed,
    )
    return sigma
