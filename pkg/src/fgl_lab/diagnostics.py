"""Post-hoc audits of recorded runs against the analytic inequalities.

All time derivatives are centered finite differences on the (generally
nonuniform) recorded sample times, so every check that involves a
derivative is evaluated on interior samples only.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import WeightNotRegisteredError
from .evolution import TimeSeries
from .ode import (
    BoundParams,
    lower_bound_divergence_time,
    weighted_norm_lower_bound,
)
from .weights import WeightSpec


def _resolve_label(series: TimeSeries, weight) -> str:
    if weight is None:
        label = series.weights[0].label
    elif isinstance(weight, WeightSpec):
        label = weight.label
    else:
        label = str(weight)
    if label not in series.momenta:
        raise WeightNotRegisteredError(
            f"weight {label!r} was not recorded; have {sorted(series.momenta)}"
        )
    return label


def weighted_momentum(series: TimeSeries, weight=None) -> np.ndarray:
    """Recorded Q_h(t) = ||u(t)/h||_2^2 samples for one registered weight."""
    return series.momenta[_resolve_label(series, weight)]


@dataclass(frozen=True)
class MarginReport:
    """Normalized margins of an inequality along a run.

    margins > 0 means the checked quantity clears its bound; the report
    is 'violated' when the worst margin dips below -tol.
    """

    times: np.ndarray
    margins: np.ndarray
    tol: float
    violated: bool
    worst: float
    n_certified: int = 0
    certified_from: float | None = None


def check_weighted_lower_bound(
    series: TimeSeries,
    b: BoundParams,
    weight=None,
    variant: str = "conservative",
    tol: float = 0.05,
) -> MarginReport:
    """Margins of ||u(t)/h||_2 against its blow-up lower bound.

    Samples at or past the bound's divergence time are excluded from the
    margins (there the bound certifies blow-up outright) and counted in
    ``n_certified``.
    """
    label = _resolve_label(series, weight)
    values = np.sqrt(series.momenta[label])
    t_div = lower_bound_divergence_time(b)
    if math.isinf(t_div):
        mask = np.ones_like(series.times, dtype=bool)
    else:
        mask = series.times < t_div * (1.0 - 1e-9)
    times = series.times[mask]
    if times.size == 0:
        return MarginReport(
            times=times,
            margins=np.empty(0),
            tol=tol,
            violated=False,
            worst=math.nan,
            n_certified=int(series.times.size),
            certified_from=t_div,
        )
    bound = weighted_norm_lower_bound(b, times, variant=variant)
    bound = np.atleast_1d(np.asarray(bound, dtype=float))
    margins = (values[mask] - bound) / bound
    worst = float(np.min(margins))
    n_cert = int(series.times.size - times.size)
    return MarginReport(
        times=times,
        margins=margins,
        tol=tol,
        violated=bool(worst < -tol),
        worst=worst,
        n_certified=n_cert,
        certified_from=t_div if n_cert else None,
    )


def check_growth_inequality(
    series: TimeSeries,
    c0: float,
    c1: float,
    weight=None,
    tol: float = 0.05,
) -> MarginReport:
    """Margins of Q' >= c0 Q^{(p+1)/2} - c1 Q on interior samples.

    Margins are normalized by the scale c0 Q^{(p+1)/2} + c1 Q of the
    right-hand side.
    """
    if series.times.size < 5:
        raise ValueError("need at least 5 recorded samples for derivative checks")
    label = _resolve_label(series, weight)
    q = series.momenta[label]
    qdot = np.gradient(q, series.times)
    sigma = (series.p + 1.0) / 2.0
    rhs_scale = c0 * q**sigma + c1 * q
    raw = qdot - c0 * q**sigma + c1 * q
    margins = (raw / rhs_scale)[1:-1]
    worst = float(np.min(margins))
    return MarginReport(
        times=series.times[1:-1],
        margins=margins,
        tol=tol,
        violated=bool(worst < -tol),
        worst=worst,
    )


def fit_growth_constants(series: TimeSeries, weight=None) -> tuple[float, float]:
    """Least-squares (c0, c1) with Q' ~ c0 Q^{(p+1)/2} - c1 Q on interior samples."""
    if series.times.size < 5:
        raise ValueError("need at least 5 recorded samples for derivative checks")
    label = _resolve_label(series, weight)
    q = series.momenta[label]
    qdot = np.gradient(q, series.times)[1:-1]
    qi = q[1:-1]
    design = np.column_stack([qi ** ((series.p + 1.0) / 2.0), -qi])
    coef, *_ = np.linalg.lstsq(design, qdot, rcond=None)
    return float(coef[0]), float(coef[1])


@dataclass(frozen=True)
class H1GrowthFit:
    """Fit of the Sobolev-norm growth to its Riccati-type envelope.

    c_hat is the constant in ||u(t)||_{H1} <= (||u0||^{-(p-1)}
    - c_hat (p-1) t / 2)^{-1/(p-1)}; implied_lifespan is where that
    envelope diverges (+inf when the fit shows no growth).
    """

    c_hat: float
    implied_lifespan: float
    times: np.ndarray
    h1: np.ndarray


def h1_series(series: TimeSeries, t_window: tuple[float, float] | None = None) -> H1GrowthFit:
    """Fit c_hat from the recorded H^1 samples.

    In the variable y = ||u||_{H1}^{-(p-1)} the envelope is the straight
    line y(t) = y(0) - c_hat (p-1) t / 2, so c_hat comes from a
    least-squares slope anchored at the recorded initial value.
    """
    t = series.times
    h1 = series.h1
    if t_window is not None:
        lo, hi = t_window
        mask = (t >= lo) & (t <= hi)
        # the anchor sample stays in even if the window starts later
        t, h1 = t[mask], h1[mask]
    if t.size < 3:
        raise ValueError("need at least 3 samples in the fit window")
    m = series.p - 1.0
    y = h1 ** (-m)
    y0 = series.h1[0] ** (-m)
    dt = t - series.times[0]
    slope = float(np.sum(dt * (y - y0)) / np.sum(dt**2))
    c_hat = -2.0 * slope / m
    if c_hat <= 0:
        return H1GrowthFit(
            c_hat=c_hat, implied_lifespan=math.inf, times=t, h1=h1
        )
    lifespan = 2.0 / (c_hat * m * series.h1[0] ** m)
    return H1GrowthFit(c_hat=c_hat, implied_lifespan=lifespan, times=t, h1=h1)


@dataclass(frozen=True)
class MassIdentityReport:
    """Residuals of d/dt ||u||_2^2 = factor * ||u||_{p+1}^{p+1} for factor 1 and 2.

    Residuals are relative to the identity's right-hand side; the
    best_factor is the one with smaller mean residual.
    """

    times: np.ndarray
    residual_one: np.ndarray
    residual_two: np.ndarray
    best_factor: int

    @property
    def best_residual(self) -> float:
        res = self.residual_one if self.best_factor == 1 else self.residual_two
        return float(np.max(res))


def mass_identity_residual(series: TimeSeries) -> MassIdentityReport:
    """Audit which prefactor the mass production identity actually carries."""
    if series.times.size < 5:
        raise ValueError("need at least 5 recorded samples for derivative checks")
    dmdt = np.gradient(series.mass, series.times)[1:-1]
    p_pow = series.lp1[1:-1]
    res = {
        k: np.abs(dmdt - k * p_pow) / (k * p_pow) for k in (1.0, 2.0)
    }
    best = 1 if np.mean(res[1.0]) <= np.mean(res[2.0]) else 2
    return MassIdentityReport(
        times=series.times[1:-1],
        residual_one=res[1.0],
        residual_two=res[2.0],
        best_factor=best,
    )
