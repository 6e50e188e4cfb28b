"""Fundamental limits for sensing power-law correlated dephasing noise with qubit arrays."""

__version__ = "0.1.0"

from .errors import GridTooCoarse, NegativeEntries, PSDViolation, StepTooCoarse, UnsupportedExponent
from .noise_model import DephasingMatrix, PowerLawSpatialModel, build_dephasing_matrix, check_psd
from .pulse_filter import PulseSequence, SpectralModel, coefficient_closed_form, optimize_shot_time
from .qfi import (advantage_ratio, fq_short_time, optimal_entangled_rate, optimal_separable_rate,
                  qfi_sld)
from .scaling import (SweepConfig, sweep_markovian_advantage, sweep_nonmarkovian_advantage,
                      theoretical_exponent, topt_collapse_check)

__all__ = [
    "DephasingMatrix", "GridTooCoarse", "NegativeEntries", "PSDViolation", "PowerLawSpatialModel",
    "PulseSequence", "SpectralModel", "StepTooCoarse", "SweepConfig", "UnsupportedExponent",
    "advantage_ratio", "build_dephasing_matrix", "check_psd", "coefficient_closed_form",
    "fq_short_time", "optimal_entangled_rate", "optimal_separable_rate", "optimize_shot_time",
    "qfi_sld", "sweep_markovian_advantage", "sweep_nonmarkovian_advantage", "theoretical_exponent",
    "topt_collapse_check",
]
