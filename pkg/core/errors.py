#!/usr/bin/env python3
"""
LevyLab Errors
==============

Exception hierarchy shared by every module. The command line maps the
three run-level failures onto exit codes.
"""

from typing import Optional


class LevyLabError(Exception):
    """Base class for all lab errors"""


class ConfigError(LevyLabError):
    """Scenario configuration could not be parsed or resolved"""


class ReportIOError(LevyLabError):
    """Reports could not be written"""


class ExperimentFailure(LevyLabError):
    """An asserted invariant failed during an experiment"""

    def __init__(self, invariant: str, detail: str = ""):
        self.invariant = invariant
        self.detail = detail
        message = f"invariant '{invariant}' failed"
        if detail:
            message += f": {detail}"
        super().__init__(message)


class NonConvergentQuadrature(LevyLabError):
    """Adaptive quadrature did not reach its tolerance"""


class InvalidAperture(LevyLabError, ValueError):
    """Cone aperture outside (0, 1)"""


class InsufficientProfile(LevyLabError):
    """Index profile too short to extrapolate"""


class RateOverflow(LevyLabError):
    """Expected event count exceeds the configured budget"""

    def __init__(self, rate: float, budget: float):
        self.rate = rate
        self.budget = budget
        super().__init__(f"expected event count {rate:.4g} exceeds budget {budget:.4g}")


class BlowUp(LevyLabError):
    """Solution norm exceeded the blow-up bound"""

    def __init__(self, time: float, norm: float):
        self.time = time
        self.norm = norm
        super().__init__(f"state norm {norm:.4g} at t={time:.6g}")


class IllConditioned(LevyLabError):
    """Stochastic exponent and its inverse drifted apart"""

    def __init__(self, defect: float, tolerance: Optional[float] = None):
        self.defect = defect
        self.tolerance = tolerance
        super().__init__(f"exponent defect {defect:.3g} exceeds tolerance {tolerance}")


class InvalidParams(LevyLabError, ValueError):
    """Construction parameters out of range"""


class NonConvergent(LevyLabError):
    """Finite-difference estimates failed to settle"""


class TooFewSamples(LevyLabError):
    """Not enough samples for a density estimate"""


class LatticeMismatch(LevyLabError):
    """Density estimates live on different lattices"""


class Inconclusive(LevyLabError):
    """Index uncertainty straddles a regime boundary"""


class DegenerateGradientWarning(UserWarning):
    """Drift gradient is numerically singular at a sample point"""
