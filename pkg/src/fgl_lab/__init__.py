"""Numerical laboratory for finite-time blow-up in the repulsive
fractional Ginzburg-Landau equation u_t = -i|D|u + |u|^{p-1}u on a
periodic domain."""

__version__ = "0.1.0"

from .errors import (
    BlowupExceededError,
    BoundDivergedError,
    ConfigError,
    ConvergenceError,
    CorruptFieldError,
    GridStabilityError,
    SingularSubstepError,
    SupercriticalError,
    ThresholdNotMetError,
    WeightNotRegisteredError,
)
from .grid import (
    FieldState,
    GridSpec,
    apply_fractional,
    apply_gradient,
    apply_half_wave,
    apply_multiplier,
    field_from_function,
    fractional_symbol,
    gradient_symbol,
    h1_norm,
    half_wave_phase_symbol,
    l2_norm,
    lp_norm,
    make_grid,
    norm,
    spectral_l2_norm,
    sup_norm,
)
from .ode import (
    BoundParams,
    LifespanBound,
    OdeParams,
    OdeSolution,
    blowup_time,
    closed_form_eval,
    comparison_ode,
    critical_initial_norm,
    lifespan_upper_bound,
    lower_bound_divergence_time,
    numeric_oracle,
    solve_closed_form,
    weighted_norm_lower_bound,
)
from .weights import (
    CommutatorEstimate,
    WeightSpec,
    apply_commutator,
    apply_weighted_kernel,
    estimate_kappa,
    estimate_weighted_kernel_norm,
    eval_weight,
    inv_h_tail_integrable,
    inv_weight_values,
    norm_inv_h,
    weight_values,
    weighted_kernel_matrix,
)
from .evolution import (
    BlowupReport,
    ConstantProfile,
    CustomProfile,
    GaussianProfile,
    SimConfig,
    TimeSeries,
    choose_dt,
    homogeneous_blowup_time,
    initial_field,
    nonlinear_substep,
    scaled_profile,
    simulate,
    strang_step,
)
from .diagnostics import (
    H1GrowthFit,
    MarginReport,
    MassIdentityReport,
    check_growth_inequality,
    check_weighted_lower_bound,
    fit_growth_constants,
    h1_series,
    mass_identity_residual,
    weighted_momentum,
)
from .kernel_decay import (
    BumpSpec,
    TailFit,
    bump_eval,
    fit_tail_decay,
    kernel_transform,
    kernel_transform_complex,
)
from .experiments import (
    BoundsAudit,
    StabilityCheck,
    SweepResult,
    ThresholdSearch,
    bounds_consistency,
    commutator_scaling,
    domain_doubling_check,
    lifespan_sweep,
    predicted_threshold_scale,
    subcritical_threshold,
)
