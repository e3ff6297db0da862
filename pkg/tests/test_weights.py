"""Bracket weights, commutator norm estimation, and the smoothing kernel."""

import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.linalg import svdvals

from fgl_lab import (
    ConvergenceError,
    FieldState,
    WeightSpec,
    apply_commutator,
    apply_weighted_kernel,
    estimate_kappa,
    estimate_weighted_kernel_norm,
    eval_weight,
    inv_h_tail_integrable,
    inv_weight_values,
    make_grid,
    norm_inv_h,
    weight_values,
    weighted_kernel_matrix,
)


def random_field(grid, seed):
    rng = np.random.default_rng(seed)
    vals = rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape)
    return FieldState(grid, vals)


def inner(f, g):
    return complex(np.vdot(f.values, g.values) * f.grid.cell_volume)


class TestWeightSpec:
    def test_values_on_grid(self):
        grid = make_grid(10.0, 64)
        w = WeightSpec(1.0, 1.0)
        h = weight_values(w, grid)
        x = grid.nodes
        assert np.allclose(h, np.sqrt(1.0 + x**2))
        assert np.allclose(inv_weight_values(w, grid) * h, 1.0)

    def test_scale_dilates_argument(self):
        grid = make_grid(10.0, 64)
        h2 = weight_values(WeightSpec(1.0, 2.0), grid)
        x = grid.nodes
        assert np.allclose(h2, np.sqrt(1.0 + (x / 2.0) ** 2))

    def test_exponent_zero_is_flat(self):
        grid = make_grid(10.0, 64)
        assert np.allclose(weight_values(WeightSpec(0.0, 1.0), grid), 1.0)

    def test_label_and_rescale(self):
        w = WeightSpec(1.0, 1.0)
        assert w.label == "bracket_s1_R1"
        assert w.rescaled(4.0).scale == pytest.approx(4.0)
        assert w.rescaled(4.0).exponent == w.exponent

    def test_validation(self):
        with pytest.raises(ValueError):
            WeightSpec(-0.5, 1.0)
        with pytest.raises(ValueError):
            WeightSpec(1.0, 0.0)

    def test_eval_weight_fields(self):
        grid = make_grid(10.0, 64)
        w = WeightSpec(1.0, 1.0)
        assert np.allclose(
            eval_weight(w, grid, "h").values.real, weight_values(w, grid)
        )
        assert np.allclose(
            eval_weight(w, grid, "inv").values.real, inv_weight_values(w, grid)
        )
        with pytest.raises(ValueError):
            eval_weight(w, grid, "sqrt")


class TestNormInvH:
    def test_bracket_weight_norm_is_sqrt_pi(self):
        grid = make_grid(50.0, 2048)
        assert norm_inv_h(WeightSpec(1.0, 1.0), grid) == pytest.approx(
            math.sqrt(math.pi), rel=1e-3
        )

    def test_dilation_scales_like_sqrt_r(self):
        grid = make_grid(50.0, 2048)
        base = norm_inv_h(WeightSpec(1.0, 1.0), grid)
        doubled = norm_inv_h(WeightSpec(1.0, 2.0), grid)
        assert doubled / base == pytest.approx(math.sqrt(2.0), rel=1e-3)

    def test_tail_correction_improves_truncation(self):
        grid = make_grid(50.0, 2048)
        w = WeightSpec(1.0, 1.0)
        with_tail = norm_inv_h(w, grid, tail_correction=True)
        without = norm_inv_h(w, grid, tail_correction=False)
        exact = math.sqrt(math.pi)
        assert abs(with_tail - exact) < abs(without - exact)

    def test_flat_weight_norm_is_sqrt_domain(self):
        grid = make_grid(50.0, 2048)
        assert norm_inv_h(WeightSpec(0.0, 1.0), grid) == pytest.approx(
            math.sqrt(100.0), rel=1e-12
        )

    def test_tail_integrability_predicate(self):
        grid = make_grid(50.0, 256)
        assert inv_h_tail_integrable(WeightSpec(1.0, 1.0), grid)
        assert not inv_h_tail_integrable(WeightSpec(0.4, 1.0), grid)
        assert not inv_h_tail_integrable(WeightSpec(0.0, 1.0), grid)


class TestCommutator:
    @given(seed=st.integers(0, 2**31 - 1))
    def test_adjoint_identity(self, seed):
        grid = make_grid(15.0, 64)
        w = WeightSpec(1.0, 1.0)
        f = random_field(grid, seed)
        g = random_field(grid, seed + 1)
        lhs = inner(apply_commutator(w, grid, f), g)
        rhs = inner(f, apply_commutator(w, grid, g, adjoint=True))
        scale = max(abs(lhs), abs(rhs), 1e-30)
        assert abs(lhs - rhs) / scale < 1e-10

    def test_linearity(self):
        grid = make_grid(15.0, 64)
        w = WeightSpec(1.0, 1.0)
        f = random_field(grid, 5)
        g = random_field(grid, 6)
        combo = FieldState(grid, 2.0 * f.values - 1.5j * g.values)
        out = apply_commutator(w, grid, combo)
        expected = (
            2.0 * apply_commutator(w, grid, f).values
            - 1.5j * apply_commutator(w, grid, g).values
        )
        assert np.max(np.abs(out.values - expected)) < 1e-10

    def test_flat_weight_commutator_vanishes(self):
        grid = make_grid(15.0, 64)
        w = WeightSpec(0.0, 1.0)
        f = random_field(grid, 9)
        out = apply_commutator(w, grid, f)
        assert np.max(np.abs(out.values)) < 1e-12

    def test_estimate_matches_dense_svd(self):
        grid = make_grid(10.0, 128)
        w = WeightSpec(1.0, 1.0)
        mat = np.zeros((128, 128), dtype=complex)
        basis = np.eye(128)
        for j in range(128):
            col = apply_commutator(w, grid, FieldState(grid, basis[:, j]))
            mat[:, j] = col.values
        sigma_dense = svdvals(mat)[0]
        est = estimate_kappa(w, grid, tol=1e-10, seed=0)
        assert est.kappa == pytest.approx(sigma_dense, rel=1e-8)
        assert est.iterations < 10000
        assert est.kappa > 0

    def test_estimate_flat_weight_is_zero(self):
        grid = make_grid(10.0, 64)
        est = estimate_kappa(WeightSpec(0.0, 1.0), grid, tol=1e-10, seed=0)
        assert est.kappa == 0.0

    def test_seed_determinism(self):
        grid = make_grid(10.0, 128)
        w = WeightSpec(1.0, 1.0)
        a = estimate_kappa(w, grid, tol=1e-10, seed=42).kappa
        b = estimate_kappa(w, grid, tol=1e-10, seed=42).kappa
        assert a == b

    def test_iteration_budget_raises(self):
        grid = make_grid(10.0, 128)
        with pytest.raises(ConvergenceError):
            estimate_kappa(WeightSpec(1.0, 1.0), grid, tol=1e-14, max_iter=2)


class TestWeightedKernel:
    def test_flat_weight_norm_below_pi(self):
        # h == 1: the kernel is <x-y>^{-2}, whose convolution norm is pi.
        grid = make_grid(100.0, 1024)
        val = estimate_weighted_kernel_norm(WeightSpec(0.0, 1.0), grid)
        assert val <= math.pi * 1.001
        assert val > 0.9 * math.pi

    def test_estimate_matches_dense_svd(self):
        grid = make_grid(20.0, 256)
        w = WeightSpec(1.0, 1.0)
        mat = weighted_kernel_matrix(w, grid)
        est = estimate_weighted_kernel_norm(w, grid)
        assert est == pytest.approx(svdvals(mat)[0], rel=1e-7)

    def test_apply_matches_matrix(self):
        grid = make_grid(20.0, 256)
        w = WeightSpec(1.0, 1.0)
        f = random_field(grid, 3)
        mat = weighted_kernel_matrix(w, grid)
        out = apply_weighted_kernel(w, grid, f)
        assert np.allclose(out.values, mat @ f.values, rtol=1e-12, atol=1e-14)

    def test_grid_budget_guard(self):
        grid = make_grid(100.0, 8192)
        with pytest.raises(ValueError, match="points"):
            weighted_kernel_matrix(WeightSpec(1.0, 1.0), grid, max_points=4096)
