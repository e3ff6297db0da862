"""Split-step time integration with built-in finite-time blow-up detection.

One Strang step of size dt is

    e^{-i|D| dt/2}  o  N_dt  o  e^{-i|D| dt/2},

where both factors are exact: the linear half-steps are unit-modulus
Fourier multipliers and N_dt advances the focusing nonlinearity
pointwise through its closed-form modulus solution

    rho(dt) = (rho0^{-(p-1)} - (p-1) dt)^{-1/(p-1)},  phase frozen.

The step size adapts to keep the nonlinear amplification per step at a
fixed fraction theta of the distance to the substep singularity.  A run
ends either at t_max or at the first of three blow-up signals: the sup
norm crossing its threshold, the adaptive dt underflowing, or the
nonlinear substep turning singular inside a step.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import CorruptFieldError, SingularSubstepError
from .grid import (
    FieldState,
    GridSpec,
    apply_half_wave,
    h1_norm,
    sup_norm,
)
from .weights import WeightSpec, inv_weight_values

DEFAULT_WEIGHTS = (WeightSpec(exponent=1.0), WeightSpec(exponent=0.5))


# ----------------------------------------------------------------------
# Initial data profiles


@dataclass(frozen=True)
class GaussianProfile:
    amplitude: float = 1.0
    width: float = 1.0
    center: float = 0.0

    def __post_init__(self):
        if self.width <= 0:
            raise ValueError("Gaussian width must be positive")


@dataclass(frozen=True)
class ConstantProfile:
    value: complex = 1.0


@dataclass(frozen=True, eq=False)
class CustomProfile:
    samples: np.ndarray


def initial_field(profile, grid: GridSpec) -> FieldState:
    """Realize an initial-data profile on a grid."""
    if isinstance(profile, GaussianProfile):
        r2 = sum((x - profile.center) ** 2 for x in grid.coordinates())
        vals = profile.amplitude * np.exp(-r2 / profile.width**2)
        return FieldState(grid, np.broadcast_to(vals, grid.shape).astype(complex))
    if isinstance(profile, ConstantProfile):
        return FieldState(grid, np.full(grid.shape, profile.value, dtype=complex))
    if isinstance(profile, CustomProfile):
        return FieldState(grid, profile.samples)
    raise TypeError(f"unknown profile type {type(profile).__name__}")


def scaled_profile(profile, factor: float):
    """Return the profile with its amplitude multiplied by ``factor``."""
    if isinstance(profile, GaussianProfile):
        return GaussianProfile(
            amplitude=profile.amplitude * factor,
            width=profile.width,
            center=profile.center,
        )
    if isinstance(profile, ConstantProfile):
        return ConstantProfile(value=profile.value * factor)
    if isinstance(profile, CustomProfile):
        return CustomProfile(samples=np.asarray(profile.samples) * factor)
    raise TypeError(f"unknown profile type {type(profile).__name__}")


def homogeneous_blowup_time(amplitude: float, p: float) -> float:
    """Exact lifespan of spatially constant data of modulus ``amplitude``."""
    return 1.0 / ((p - 1.0) * amplitude ** (p - 1.0))


# ----------------------------------------------------------------------
# Configuration and step operations


@dataclass(frozen=True)
class SimConfig:
    """Everything one evolution run depends on."""

    grid: GridSpec
    p: float
    profile: object
    t_max: float
    theta: float = 0.5
    dt_max: float = 0.05
    dt_min: float = 1e-12
    sup_threshold: float = 1e8
    record_every: int = 1
    linear_only: bool = False

    def __post_init__(self):
        if self.p <= 1:
            raise ValueError("nonlinearity power p must exceed 1")
        if self.t_max <= 0:
            raise ValueError("t_max must be positive")
        if not 0.0 < self.theta < 1.0:
            raise ValueError("step-safety factor theta must lie in (0, 1)")
        if self.dt_max <= 0 or self.dt_min <= 0 or self.dt_min > self.dt_max:
            raise ValueError("require 0 < dt_min <= dt_max")
        if self.sup_threshold <= 0:
            raise ValueError("sup_threshold must be positive")
        if self.record_every < 1:
            raise ValueError("record_every must be >= 1")


def nonlinear_substep(f: FieldState, dt: float, p: float) -> FieldState:
    """Exact flow of w' = |w|^{p-1} w for time dt (phase is frozen).

    Raises SingularSubstepError when the largest modulus would reach its
    singularity within dt; the exception carries the largest admissible
    step size.
    """
    if dt < 0:
        raise ValueError("substep time must be >= 0")
    vals = f.values
    if not np.isfinite(vals).all():
        raise CorruptFieldError("field contains NaN or Inf")
    if dt == 0.0:
        return f
    m = p - 1.0
    sup = float(np.max(np.abs(vals)))
    if sup > 0:
        dt_adm = 1.0 / (m * sup**m)
        if dt >= dt_adm:
            raise SingularSubstepError(
                f"nonlinear substep singular: dt = {dt:.3e} >= {dt_adm:.3e}",
                dt_admissible=dt_adm,
            )
    amp = np.abs(vals) ** m
    factor = (1.0 - m * dt * amp) ** (-1.0 / m)
    return FieldState(f.grid, vals * factor)


def strang_step(
    f: FieldState, dt: float, p: float, linear_only: bool = False
) -> FieldState:
    """One second-order split step of size dt."""
    half = apply_half_wave(f, 0.5 * dt)
    if not linear_only:
        half = nonlinear_substep(half, dt, p)
    return apply_half_wave(half, 0.5 * dt)


def choose_dt(f: FieldState, p: float, theta: float, dt_max: float) -> float:
    """Adaptive step: theta over the current nonlinear blow-up rate."""
    sup = sup_norm(f)
    if sup == 0.0:
        return dt_max
    return min(dt_max, theta / ((p - 1.0) * sup ** (p - 1.0)))


# ----------------------------------------------------------------------
# Run records


@dataclass(frozen=True, eq=False)
class TimeSeries:
    """Diagnostics sampled along a run (times strictly increasing)."""

    p: float
    grid: GridSpec
    weights: tuple[WeightSpec, ...]
    times: np.ndarray
    dts: np.ndarray
    mass: np.ndarray          # ||u||_2^2
    h1: np.ndarray            # ||u||_{H^1}
    lp1: np.ndarray           # ||u||_{p+1}^{p+1}
    sup: np.ndarray
    momenta: dict             # weight label -> ||u/h||_2^2 samples


@dataclass(frozen=True)
class BlowupReport:
    """Outcome of a run; criterion is None when no blow-up was detected."""

    blew_up: bool
    t_detected: float | None
    criterion: str | None
    final_sup: float
    steps: int
    bracket: tuple[float, float] | None = None


class _Recorder:
    def __init__(self, cfg: SimConfig, weights):
        self.cfg = cfg
        self.weights = tuple(weights)
        self.inv_sq = [inv_weight_values(w, cfg.grid) ** 2 for w in self.weights]
        self.rows = {k: [] for k in ("t", "dt", "mass", "h1", "lp1", "sup")}
        self.momenta = {w.label: [] for w in self.weights}
        self.last_t = None

    def record(self, t: float, dt: float, u: FieldState):
        if self.last_t is not None and t <= self.last_t:
            return
        cv = self.cfg.grid.cell_volume
        dens = np.abs(u.values) ** 2
        self.rows["t"].append(t)
        self.rows["dt"].append(dt)
        self.rows["mass"].append(cv * float(np.sum(dens)))
        self.rows["h1"].append(h1_norm(u))
        self.rows["lp1"].append(
            cv * float(np.sum(dens ** ((self.cfg.p + 1.0) / 2.0)))
        )
        self.rows["sup"].append(float(np.sqrt(np.max(dens))))
        for w, inv_sq in zip(self.weights, self.inv_sq):
            self.momenta[w.label].append(cv * float(np.sum(dens * inv_sq)))
        self.last_t = t

    def freeze(self) -> TimeSeries:
        return TimeSeries(
            p=self.cfg.p,
            grid=self.cfg.grid,
            weights=self.weights,
            times=np.asarray(self.rows["t"]),
            dts=np.asarray(self.rows["dt"]),
            mass=np.asarray(self.rows["mass"]),
            h1=np.asarray(self.rows["h1"]),
            lp1=np.asarray(self.rows["lp1"]),
            sup=np.asarray(self.rows["sup"]),
            momenta={k: np.asarray(v) for k, v in self.momenta.items()},
        )


def simulate(cfg: SimConfig, weights=None) -> tuple[TimeSeries, BlowupReport]:
    """Run the adaptive split-step integrator until t_max or blow-up.

    Detection policy, first signal wins:
      1. sup-norm threshold crossed     -> 'sup_threshold'
      2. adaptive dt below dt_min       -> 'dt_underflow'
      3. singular nonlinear substep     -> 'nonlinear_substep_singular'

    NaN/Inf anywhere is a corrupt state and raises CorruptFieldError
    rather than being reported as blow-up.
    """
    if weights is None:
        weights = DEFAULT_WEIGHTS
    rec = _Recorder(cfg, weights)
    u = initial_field(cfg.profile, cfg.grid)
    if not u.is_finite:
        raise CorruptFieldError("initial data contains NaN or Inf")
    t = 0.0
    steps = 0
    last_dt = 0.0
    rec.record(t, 0.0, u)

    while True:
        sup = sup_norm(u)
        if sup >= cfg.sup_threshold:
            rec.record(t, last_dt, u)
            report = BlowupReport(
                blew_up=True,
                t_detected=t,
                criterion="sup_threshold",
                final_sup=sup,
                steps=steps,
                bracket=(max(t - last_dt, 0.0), t),
            )
            return rec.freeze(), report

        if cfg.t_max - t <= 1e-12 * cfg.t_max:
            break

        if cfg.linear_only:
            dt_stab = cfg.dt_max
        else:
            dt_stab = choose_dt(u, cfg.p, cfg.theta, cfg.dt_max)
        if dt_stab < cfg.dt_min:
            rec.record(t, last_dt, u)
            report = BlowupReport(
                blew_up=True,
                t_detected=t,
                criterion="dt_underflow",
                final_sup=sup,
                steps=steps,
                bracket=(t, t),
            )
            return rec.freeze(), report
        dt = min(dt_stab, cfg.t_max - t)

        try:
            u = strang_step(u, dt, cfg.p, linear_only=cfg.linear_only)
        except SingularSubstepError as err:
            rec.record(t, last_dt, u)
            t_hit = t + err.dt_admissible
            report = BlowupReport(
                blew_up=True,
                t_detected=t_hit,
                criterion="nonlinear_substep_singular",
                final_sup=sup,
                steps=steps,
                bracket=(t, t_hit),
            )
            return rec.freeze(), report
        if not u.is_finite:
            raise CorruptFieldError(f"state corrupt (NaN/Inf) after step at t = {t}")
        t += dt
        last_dt = dt
        steps += 1
        if steps % cfg.record_every == 0:
            rec.record(t, dt, u)

    rec.record(t, last_dt, u)
    report = BlowupReport(
        blew_up=False,
        t_detected=None,
        criterion=None,
        final_sup=sup_norm(u),
        steps=steps,
        bracket=None,
    )
    return rec.freeze(), report
