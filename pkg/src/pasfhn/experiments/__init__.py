from .averaging import (fit_residual_constant, phase_locked_times, psi1, psi2, residual_scale,
                        verify_pas_derivation, window_average)
from .linear import check_small_data, compute_alpha, small_data_thresholds, source_size
from .oscillatory import AccuracyError, DecayResult, fit_slope, oscillatory_decay_check
from .sweep import SweepBlowUp, SweepResult, approximation_study, fit_order, run_point

__all__ = [
    "fit_residual_constant", "phase_locked_times", "psi1", "psi2", "residual_scale",
    "verify_pas_derivation", "window_average", "check_small_data", "compute_alpha",
    "small_data_thresholds", "source_size", "AccuracyError", "DecayResult", "fit_slope",
    "oscillatory_decay_check", "SweepBlowUp", "SweepResult", "approximation_study", "fit_order",
    "run_point",
]
