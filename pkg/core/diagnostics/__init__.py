"""Density estimates, Fourier probes, thresholds and regimes"""

from .density import (DensityEstimate, DensityKind, bandwidth_ladder, common_lattice, density_estimate,
                      lattice_for, silverman_bandwidth)
from .fourier import CharProbe, analytic_char_modulus, char_function_probe, factorial_frequencies
from .thresholds import (IrregularityThresholds, c_constant, irregularity_thresholds, smoothness_ladder,
                         smoothness_threshold)
from .regime import (Regime, RegimeVerdict, RegularityReport, SupDensityRow, classify_regime,
                     regularity_report, sup_density_trend, sup_density_verdict, tv_distance, tv_noise_level)

__all__ = [
    "DensityEstimate", "DensityKind", "bandwidth_ladder", "common_lattice", "density_estimate",
    "lattice_for", "silverman_bandwidth",
    "CharProbe", "analytic_char_modulus", "char_function_probe", "factorial_frequencies",
    "IrregularityThresholds", "c_constant", "irregularity_thresholds", "smoothness_ladder",
    "smoothness_threshold",
    "Regime", "RegimeVerdict", "RegularityReport", "SupDensityRow", "classify_regime",
    "regularity_report", "sup_density_trend", "sup_density_verdict", "tv_distance", "tv_noise_level",
]
