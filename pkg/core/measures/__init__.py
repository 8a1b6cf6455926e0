"""Levy measures and their order indices"""

from .directions import Cone, direction_grid
from .profiles import PowerLawProfile, RadialProfile, TabulatedProfile
from .levy_measure import (AngularLaw, AtomicSequence, LevyMeasure, Mixture, RadialDensity,
                           ZeroMeasure, factorial_atoms, finite_atoms, geometric_atoms,
                           parabola_atoms, stable_measure, zero_measure)
from .indices import (IndexClass, IndexKind, IndexProfile, classify_index, estimate_order_index,
                      lower_index_profile, moment_checks, order_index_profile,
                      small_jump_variance_profile, truncated_moment, wide_cone_check)

__all__ = [
    "Cone", "direction_grid",
    "PowerLawProfile", "RadialProfile", "TabulatedProfile",
    "AngularLaw", "AtomicSequence", "LevyMeasure", "Mixture", "RadialDensity", "ZeroMeasure",
    "factorial_atoms", "finite_atoms", "geometric_atoms", "parabola_atoms", "stable_measure",
    "zero_measure",
    "IndexClass", "IndexKind", "IndexProfile", "classify_index", "estimate_order_index",
    "lower_index_profile", "moment_checks", "order_index_profile", "small_jump_variance_profile",
    "truncated_moment", "wide_cone_check",
]
