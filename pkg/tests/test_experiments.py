"""End-to-end experiments: sweeps, threshold search, bound audits."""

import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from fgl_lab import (
    ConstantProfile,
    ConvergenceError,
    CustomProfile,
    FieldState,
    GaussianProfile,
    GridStabilityError,
    SimConfig,
    SupercriticalError,
    ThresholdNotMetError,
    WeightSpec,
    bounds_consistency,
    commutator_scaling,
    domain_doubling_check,
    estimate_kappa,
    initial_field,
    lifespan_sweep,
    make_grid,
    predicted_threshold_scale,
    subcritical_threshold,
)
from fgl_lab.experiments import _require_stable

W = WeightSpec(1.0, 1.0)


class TestDomainDoubling:
    def test_grid_independent_scalar_is_stable(self):
        check = domain_doubling_check(lambda g: 1.5, make_grid(10.0, 64), "const")
        assert check.value == 1.5
        assert check.doubled_value == 1.5
        assert check.rel_change == 0.0
        assert check.stable
        assert _require_stable(check) is check

    def test_domain_dependent_scalar_is_flagged(self):
        check = domain_doubling_check(
            lambda g: g.half_length, make_grid(10.0, 64), "L"
        )
        assert check.rel_change == pytest.approx(0.5)
        assert not check.stable
        with pytest.raises(GridStabilityError, match="L moved"):
            _require_stable(check)

    def test_budget_is_respected(self):
        check = domain_doubling_check(
            lambda g: g.half_length, make_grid(10.0, 64), "L", budget=0.6
        )
        assert check.stable


@pytest.fixture(scope="module")
def sweep_base() -> SimConfig:
    return SimConfig(
        grid=make_grid(10.0, 256), p=2.0, profile=ConstantProfile(1.0),
        t_max=1.0, dt_max=1e-3,
    )


class TestLifespanSweep:
    def test_homogeneous_family_has_slope_minus_one(self, sweep_base):
        res = lifespan_sweep(sweep_base, ConstantProfile(2.0), [1, 2, 4])
        assert res.slope == pytest.approx(-1.0, abs=1e-6)
        assert np.allclose(res.measured, [0.5, 0.25, 0.125], rtol=1e-6)
        assert res.included.all()
        assert res.residual < 1e-6
        assert res.stability is not None and res.stability.stable

    def test_non_blowing_member_is_excluded(self, sweep_base):
        res = lifespan_sweep(sweep_base, ConstantProfile(2.0), [0.2, 1, 2, 4])
        assert list(res.included) == [False, True, True, True]
        assert math.isnan(res.measured[0])
        rec = res.records[0]
        assert rec["blew_up"] is False
        assert rec["t_detected"] is None
        assert rec["criterion"] is None

    def test_needs_three_blowups(self, sweep_base):
        with pytest.raises(ValueError, match="need >= 3"):
            lifespan_sweep(sweep_base, ConstantProfile(2.0), [0.1, 0.2, 1])

    def test_rejects_custom_profile(self, sweep_base):
        grid = sweep_base.grid
        prof = CustomProfile(samples=np.ones(grid.points, dtype=complex))
        with pytest.raises(ValueError, match="analytic profile"):
            lifespan_sweep(sweep_base, prof, [1, 2, 4])

    def test_rejects_nonpositive_factors(self, sweep_base):
        with pytest.raises(ValueError, match="positive"):
            lifespan_sweep(sweep_base, ConstantProfile(2.0), [-1, 1, 2])

    def test_workers_do_not_change_results(self, sweep_base):
        serial = lifespan_sweep(sweep_base, ConstantProfile(2.0), [1, 2, 4])
        parallel = lifespan_sweep(
            sweep_base, ConstantProfile(2.0), [1, 2, 4], workers=2
        )
        assert np.array_equal(serial.measured, parallel.measured)
        assert serial.slope == parallel.slope


class TestCommutatorScaling:
    def test_kappa_scales_inversely_with_dilation(self):
        res = commutator_scaling(W, [1, 2], make_grid(6.25, 128), tol=1e-6)
        assert res.slope == pytest.approx(-1.0, abs=0.01)
        product = res.measured * res.parameter_values
        assert product.max() / product.min() - 1 < 5e-3
        assert res.stability.stable

    def test_rejects_subunit_dilations(self):
        with pytest.raises(ValueError, match=">= 1"):
            commutator_scaling(W, [0.5, 1], make_grid(6.25, 128))


class TestPredictedThresholdScale:
    @given(
        p=st.floats(1.5, 2.8),
        kappa1=st.floats(0.1, 2.0),
        norm=st.floats(0.01, 5.0),
    )
    def test_solves_the_matching_equation(self, p, kappa1, norm):
        r = predicted_threshold_scale(p, kappa1, norm)
        threshold_at_r = (kappa1 / r) ** (1.0 / (p - 1.0)) * math.sqrt(
            math.pi * r
        )
        assert threshold_at_r == pytest.approx(norm, rel=1e-9)

    def test_needs_subcritical_power(self):
        with pytest.raises(SupercriticalError):
            predicted_threshold_scale(3.0, 0.5, 1.0)


@pytest.fixture(scope="module")
def base_grid_and_kappa():
    grid = make_grid(12.5, 256)
    kappa = estimate_kappa(W, grid, tol=1e-8).kappa
    return grid, kappa


class TestSubcriticalThreshold:
    def test_large_data_certified_without_dilation(self, base_grid_and_kappa):
        grid, kb = base_grid_and_kappa
        u0 = initial_field(GaussianProfile(amplitude=1.2, width=1.0, center=0.0), grid)
        found = subcritical_threshold(u0, 2.0, kb)
        assert found.r0 == 1.0
        assert len(found.history) == 1
        assert found.history[0]["met"] is True
        assert found.bound.condition_met
        assert math.isfinite(found.bound.time)
        assert found.stability.stable

    def test_small_data_needs_one_doubling(self, base_grid_and_kappa):
        grid, kb = base_grid_and_kappa
        u0 = initial_field(GaussianProfile(amplitude=0.9, width=1.0, center=0.0), grid)
        found = subcritical_threshold(u0, 2.0, kb)
        assert found.r0 == 2.0
        assert [h["met"] for h in found.history] == [False, True]
        # dilation trades kappa down faster than the data norm shrinks
        h0, h1 = found.history
        assert h1["threshold"] < h0["threshold"]
        assert h1["kappa"] == pytest.approx(h0["kappa"] / 2.0, rel=0.01)

    def test_prediction_brackets_the_dyadic_answer(self, base_grid_and_kappa):
        grid, kb = base_grid_and_kappa
        u0 = initial_field(GaussianProfile(amplitude=0.9, width=1.0, center=0.0), grid)
        found = subcritical_threshold(u0, 2.0, kb)
        # dyadic search lands within a factor of 4 of the continuum estimate
        assert 0.25 <= found.r0 / found.predicted_r0 <= 4.0

    def test_grid_budget_guard(self, base_grid_and_kappa):
        grid, kb = base_grid_and_kappa
        u0 = initial_field(GaussianProfile(amplitude=0.9, width=1.0, center=0.0), grid)
        with pytest.raises(ConvergenceError, match="grid budget"):
            subcritical_threshold(u0, 2.0, kb, max_points=256)

    def test_doubling_budget_guard(self, base_grid_and_kappa):
        grid, kb = base_grid_and_kappa
        u0 = initial_field(
            GaussianProfile(amplitude=1e-6, width=1.0, center=0.0), grid
        )
        with pytest.raises(ConvergenceError, match="threshold not met"):
            subcritical_threshold(u0, 2.0, kb, max_doublings=2, max_points=10**6)

    def test_fujita_power_is_refused(self, base_grid_and_kappa):
        grid, kb = base_grid_and_kappa
        u0 = initial_field(GaussianProfile(amplitude=1.2, width=1.0, center=0.0), grid)
        with pytest.raises(SupercriticalError, match="Fujita"):
            subcritical_threshold(u0, 3.0, kb)

    def test_parameter_validation(self, base_grid_and_kappa):
        grid, kb = base_grid_and_kappa
        u0 = initial_field(GaussianProfile(amplitude=1.2, width=1.0, center=0.0), grid)
        with pytest.raises(ValueError, match="p > 1"):
            subcritical_threshold(u0, 0.5, kb)
        with pytest.raises(ValueError, match="kappa_base"):
            subcritical_threshold(u0, 2.0, 0.0)
        grid2 = make_grid(10.0, 32, 2)
        u2 = FieldState(grid2, np.ones((32, 32), dtype=complex))
        with pytest.raises(ValueError, match="1-d"):
            subcritical_threshold(u2, 2.0, kb)


@pytest.fixture(scope="module")
def audit():
    cfg = SimConfig(
        grid=make_grid(25.0, 512), p=2.0,
        profile=GaussianProfile(amplitude=3.0, width=1.0, center=0.0),
        t_max=2.0, dt_max=0.01,
    )
    return bounds_consistency(cfg)


class TestBoundsConsistency:
    def test_simulation_beats_the_certified_lifespan(self, audit):
        assert audit.report.blew_up
        assert audit.bound.condition_met
        assert audit.report.t_detected <= audit.bound.time

    def test_initial_data_clears_threshold(self, audit):
        assert audit.bound_params.initial_weighted_norm > 1.1 * audit.threshold_value

    def test_lower_bound_margins_hold(self, audit):
        assert not audit.lower_margins.violated
        assert audit.lower_margins.worst >= -0.05

    def test_growth_inequality_holds(self, audit):
        assert not audit.growth_margins.violated
        assert audit.growth_margins.worst >= -0.05

    def test_fit_and_stability_are_reported(self, audit):
        c0_hat, c1_hat = audit.fitted_constants
        assert math.isfinite(c0_hat) and math.isfinite(c1_hat)
        assert c0_hat > 0  # realized growth is at least as fast as certified
        assert len(audit.stability) == 3
        assert all(c.stable for c in audit.stability)

    def test_subthreshold_data_is_refused(self):
        cfg = SimConfig(
            grid=make_grid(20.0, 256), p=2.0,
            profile=GaussianProfile(amplitude=0.2, width=1.0, center=0.0),
            t_max=0.5, dt_max=0.01,
        )
        with pytest.raises(ThresholdNotMetError, match="below"):
            bounds_consistency(cfg)
