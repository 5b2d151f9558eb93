"""FitzHugh-Nagumo cable model under two-frequency stimulation, its partially
averaged system (PAS), contracting rectangles and approximation-error studies."""
from .model import (Equilibrium, InvalidGridError, InvalidParameterError, ModelParams, NumericError,
                    PreconditionError, check_admissible, equilibrium_for, solve_equilibrium)
from .source import SourceParams, eval_profiles, eval_time_fields, sup_amplitude

__version__ = "0.1.0"
