"""Drift coefficients and non-degeneracy certificates"""

from .fields import (DriftField, DriftKind, custom_drift, delta, gradient_consistency, linear_drift,
                     linear_growth_constant, neg_identity, polynomial_drift, sup_gradient_norm,
                     zero_drift)
from .certificates import (KrCertificate, NondegeneracyReport, dissipativity_check, k_r_certificate,
                           nondegeneracy_trend, preimage_check, subspace_avoidance_check)

__all__ = [
    "DriftField", "DriftKind", "custom_drift", "delta", "gradient_consistency", "linear_drift",
    "linear_growth_constant", "neg_identity", "polynomial_drift", "sup_gradient_norm", "zero_drift",
    "KrCertificate", "NondegeneracyReport", "dissipativity_check", "k_r_certificate",
    "nondegeneracy_trend", "preimage_check", "subspace_avoidance_check",
]
