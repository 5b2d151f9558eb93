from .grid import (BlowUpError, ConfigurationError, FieldState, Grid, Trajectory,
                   TrajectoryInterpolant, y_norm)
from .heat import heat_kernel, heat_propagate
from .imex import ImexStepper, StabilityWarning, simulate, step_imex
from .picard import ContractionError, PicardResult, picard_linear_error
from .systems import (SourceOnGrid, SystemSpec, build_system, centered_system, default_dt,
                      full_system, linear_error_system, nonlinear_error_system, pas_system,
                      remainder_system)

__all__ = [
    "BlowUpError", "ConfigurationError", "FieldState", "Grid", "Trajectory",
    "TrajectoryInterpolant", "y_norm", "heat_kernel", "heat_propagate", "ImexStepper",
    "StabilityWarning", "simulate", "step_imex", "ContractionError", "PicardResult",
    "picard_linear_error", "SourceOnGrid", "SystemSpec", "build_system", "centered_system",
    "default_dt", "full_system", "linear_error_system", "nonlinear_error_system", "pas_system",
    "remainder_system",
]
