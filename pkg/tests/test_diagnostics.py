"""Momentum diagnostics, bound margins, and identity checks."""

import math

import numpy as np
import pytest

from fgl_lab import (
    BoundParams,
    ConstantProfile,
    GaussianProfile,
    SimConfig,
    TimeSeries,
    WeightNotRegisteredError,
    WeightSpec,
    check_growth_inequality,
    check_weighted_lower_bound,
    closed_form_eval,
    comparison_ode,
    fit_growth_constants,
    h1_series,
    homogeneous_blowup_time,
    initial_field,
    inv_weight_values,
    l2_norm,
    lower_bound_divergence_time,
    make_grid,
    mass_identity_residual,
    simulate,
    weighted_momentum,
)
from fgl_lab.grid import FieldState

W = WeightSpec(1.0, 1.0)


def exact_comparison_series(b: BoundParams, n=2001, frac=0.9) -> TimeSeries:
    """TimeSeries whose momentum is the exact comparison-ODE solution."""
    ode = comparison_ode(b)
    t_end = frac * lower_bound_divergence_time(b)
    times = np.linspace(0.0, t_end, n)
    q = closed_form_eval(ode, times)
    dts = np.full(n, times[1] - times[0])
    grid = make_grid(10.0, 16)
    return TimeSeries(
        p=b.p, grid=grid, weights=(W,), times=times, dts=dts,
        mass=q.copy(), h1=np.sqrt(q), lp1=q.copy(), sup=np.sqrt(q),
        momenta={W.label: q},
    )


@pytest.fixture(scope="module")
def ref_params() -> BoundParams:
    return BoundParams(
        p=2.0, kappa=0.5, inv_weight_norm=math.sqrt(math.pi),
        initial_weighted_norm=math.sqrt(math.pi),
    )


@pytest.fixture(scope="module")
def gaussian_run():
    cfg = SimConfig(
        grid=make_grid(20.0, 256), p=2.0,
        profile=GaussianProfile(amplitude=1.5, width=1.0, center=0.0),
        t_max=0.3, dt_max=2e-3,
    )
    return simulate(cfg, weights=(W,))


class TestWeightedMomentum:
    def test_matches_direct_quadrature(self, gaussian_run):
        series, _ = gaussian_run
        grid = series.grid
        u0 = initial_field(
            GaussianProfile(amplitude=1.5, width=1.0, center=0.0), grid
        )
        v = FieldState(grid, u0.values * inv_weight_values(W, grid))
        assert weighted_momentum(series, W)[0] == pytest.approx(
            l2_norm(v) ** 2, rel=1e-12
        )

    def test_unregistered_weight_raises(self, gaussian_run):
        series, _ = gaussian_run
        with pytest.raises(WeightNotRegisteredError):
            weighted_momentum(series, WeightSpec(2.0, 3.0))

    def test_default_weight_is_first_registered(self, gaussian_run):
        series, _ = gaussian_run
        assert np.array_equal(weighted_momentum(series), weighted_momentum(series, W))


class TestLowerBoundMargins:
    def test_exact_solution_sits_on_sharp_bound(self, ref_params):
        series = exact_comparison_series(ref_params)
        report = check_weighted_lower_bound(series, ref_params, variant="sharp")
        assert not report.violated
        assert abs(report.worst) < 1e-10
        assert report.n_certified == 0
        assert report.certified_from is None

    def test_exact_solution_clears_conservative_bound(self, ref_params):
        series = exact_comparison_series(ref_params)
        report = check_weighted_lower_bound(series, ref_params, variant="conservative")
        assert not report.violated
        assert report.worst >= -1e-12
        # conservative bound is strictly weaker away from t = 0
        assert report.margins[-1] > 0.01

    def test_sharp_margins_never_exceed_conservative_margins(self, ref_params):
        series = exact_comparison_series(ref_params)
        conservative = check_weighted_lower_bound(series, ref_params, variant="conservative")
        sharp = check_weighted_lower_bound(series, ref_params, variant="sharp")
        assert np.all(sharp.margins <= conservative.margins + 1e-12)

    def test_deficient_data_is_flagged(self, ref_params):
        series = exact_comparison_series(ref_params)
        shrunk = {W.label: 0.5 * series.momenta[W.label]}
        bad = TimeSeries(
            p=series.p, grid=series.grid, weights=series.weights,
            times=series.times, dts=series.dts, mass=series.mass,
            h1=series.h1, lp1=series.lp1, sup=series.sup, momenta=shrunk,
        )
        report = check_weighted_lower_bound(bad, ref_params, variant="sharp")
        assert report.violated
        assert report.worst < -0.25


class TestGrowthInequality:
    def test_exact_solution_has_zero_margins(self, ref_params):
        series = exact_comparison_series(ref_params)
        m = ref_params.p - 1.0
        c0 = 2.0 * ref_params.inv_weight_norm ** (-m)
        c1 = 2.0 * ref_params.kappa
        report = check_growth_inequality(series, c0, c1)
        assert not report.violated
        assert abs(report.worst) < 5e-4  # finite-difference error only

    def test_overclaimed_constant_is_flagged(self, ref_params):
        series = exact_comparison_series(ref_params)
        m = ref_params.p - 1.0
        c0 = 4.0 * ref_params.inv_weight_norm ** (-m)  # double the true c0
        c1 = 2.0 * ref_params.kappa
        report = check_growth_inequality(series, c0, c1)
        assert report.violated

    def test_fit_recovers_constants(self, ref_params):
        series = exact_comparison_series(ref_params)
        m = ref_params.p - 1.0
        c0_true = 2.0 * ref_params.inv_weight_norm ** (-m)
        c1_true = 2.0 * ref_params.kappa
        c0_hat, c1_hat = fit_growth_constants(series)
        assert c0_hat == pytest.approx(c0_true, rel=1e-3)
        assert c1_hat == pytest.approx(c1_true, rel=1e-3)

    def test_needs_enough_samples(self, ref_params):
        series = exact_comparison_series(ref_params, n=4)
        with pytest.raises(ValueError):
            check_growth_inequality(series, 1.0, 1.0)


class TestH1Fit:
    def test_constant_data_fit_is_exact(self):
        grid = make_grid(10.0, 64)
        cfg = SimConfig(
            grid=grid, p=2.0, profile=ConstantProfile(2.0),
            t_max=0.4, dt_max=2e-3,
        )
        series, _ = simulate(cfg)
        fit = h1_series(series)
        assert fit.c_hat == pytest.approx(2.0 * (2 * 10.0) ** -0.5, rel=1e-10)
        assert fit.implied_lifespan == pytest.approx(
            homogeneous_blowup_time(2.0, 2.0), rel=1e-10
        )

    def test_window_restricts_samples(self):
        grid = make_grid(10.0, 64)
        cfg = SimConfig(
            grid=grid, p=2.0, profile=ConstantProfile(2.0),
            t_max=0.4, dt_max=2e-3,
        )
        series, _ = simulate(cfg)
        fit = h1_series(series, t_window=(0.1, 0.3))
        assert fit.times[0] >= 0.1
        assert fit.times[-1] <= 0.3
        assert fit.implied_lifespan == pytest.approx(0.5, rel=1e-6)

    def test_decaying_h1_gives_infinite_lifespan(self, ref_params):
        series = exact_comparison_series(ref_params, n=101)
        decaying = TimeSeries(
            p=series.p, grid=series.grid, weights=series.weights,
            times=series.times, dts=series.dts, mass=series.mass,
            h1=1.0 / (1.0 + series.times), lp1=series.lp1, sup=series.sup,
            momenta=series.momenta,
        )
        fit = h1_series(decaying)
        assert fit.c_hat <= 0
        assert fit.implied_lifespan == math.inf


class TestMassIdentity:
    def test_factor_two_wins_on_gaussian(self, gaussian_run):
        series, _ = gaussian_run
        report = mass_identity_residual(series)
        assert report.best_factor == 2
        assert float(np.max(report.residual_two)) < 1e-3
        assert 0.9 < float(np.mean(report.residual_one)) < 1.1
        assert report.best_residual < 1e-3

    def test_factor_two_wins_on_homogeneous(self):
        cfg = SimConfig(
            grid=make_grid(10.0, 64), p=2.0, profile=ConstantProfile(2.0),
            t_max=0.4, dt_max=2e-3,
        )
        series, _ = simulate(cfg)
        report = mass_identity_residual(series)
        assert report.best_factor == 2
        assert float(np.max(report.residual_two)) < 1e-3
