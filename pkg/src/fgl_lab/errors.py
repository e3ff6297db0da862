"""Exception types shared across the package."""


class CorruptFieldError(ValueError):
    """A field contains NaN or Inf where a finite state is required."""


class BlowupExceededError(ValueError):
    """A closed-form solution was evaluated at or beyond its blow-up time."""


class SingularSubstepError(RuntimeError):
    """The exact nonlinear substep would pass through its singularity.

    Carries the largest admissible step size in ``dt_admissible``.
    """

    def __init__(self, message: str, dt_admissible: float):
        super().__init__(message)
        self.dt_admissible = dt_admissible


class ConvergenceError(RuntimeError):
    """An iterative estimate failed to converge within its budget."""


class BoundDivergedError(ValueError):
    """A lower bound was evaluated past the time where it diverges.

    Divergence of the bound certifies finite-time blow-up no later than
    the divergence time.
    """


class WeightNotRegisteredError(KeyError):
    """A diagnostic asked for a weight that the run did not record."""


class ThresholdNotMetError(ValueError):
    """Initial data does not clear the blow-up threshold with the required margin."""


class SupercriticalError(ValueError):
    """The nonlinearity power is at or above the Fujita exponent for this dimension."""


class GridStabilityError(RuntimeError):
    """A quantity changed by more than its budget under domain doubling."""


class ConfigError(ValueError):
    """A run configuration is malformed (unknown key, bad value, missing file)."""
