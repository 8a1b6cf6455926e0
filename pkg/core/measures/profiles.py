#!/usr/bin/env python3
"""
Radial Profiles
===============

One-dimensional radial densities pi(rho) on (0, inf) used by radial Levy
measures. Every functional is vectorised over the radius argument.
"""

import logging
from abc import ABC, abstractmethod
from typing import Callable, Dict, Optional

import numpy as np
from scipy import integrate

from config.settings import Config
from ..errors import InvalidParams, NonConvergentQuadrature

logger = logging.getLogger(__name__)


class RadialProfile(ABC):
    """Abstract radial density on (lower, upper]"""

    lower: float = 0.0
    upper: float = np.inf

    @abstractmethod
    def density(self, rho) -> np.ndarray:
        """Density value pi(rho)"""
        pass

    @abstractmethod
    def tail_mass(self, delta) -> np.ndarray:
        """Integral of pi over [delta, inf)"""
        pass

    @abstractmethod
    def inner_moment(self, r: float, delta) -> np.ndarray:
        """Integral of rho^r pi over (0, delta); inf when divergent"""
        pass

    @abstractmethod
    def band_moment(self, p: float, lo: float, hi: float) -> float:
        """Integral of rho^p pi over [lo, hi)"""
        pass

    @abstractmethod
    def fingerprint(self) -> str:
        pass

    def normalized_inner(self, r: float, delta) -> np.ndarray:
        """Integral of (rho/delta ^ 1)^r pi, the truncated moment divided by delta^r"""
        delta = np.asarray(delta, dtype=float)
        with np.errstate(over='ignore', invalid='ignore', divide='ignore'):
            return self.inner_moment(r, delta) / delta ** r + self.tail_mass(delta)

    def total_mass(self) -> float:
        return float(self.tail_mass(np.array(0.0)))


class PowerLawProfile(RadialProfile):
    """pi(rho) = scale * rho^(-1-alpha) on (0, upper]"""

    def __init__(self, alpha: float, scale: float = 1.0, upper: float = np.inf):
        if not (0.0 < alpha < 2.0):
            raise InvalidParams(f"stability index must lie in (0, 2), got {alpha}")
        if scale <= 0.0 or upper <= 0.0:
            raise InvalidParams("scale and upper cutoff must be positive")
        self.alpha = float(alpha)
        self.scale = float(scale)
        self.upper = float(upper)

    def density(self, rho):
        rho = np.asarray(rho, dtype=float)
        with np.errstate(divide='ignore'):
            values = self.scale * rho ** (-1.0 - self.alpha)
        return np.where((rho > 0) & (rho <= self.upper), values, 0.0)

    def _antiderivative(self, p: float, rho):
        # primitive of rho^p * pi
        e = p - self.alpha
        if e == 0.0:
            return self.scale * np.log(rho)
        return self.scale * rho ** e / e

    def tail_mass(self, delta):
        delta = np.asarray(delta, dtype=float)
        with np.errstate(divide='ignore'):
            upper_term = 0.0 if np.isinf(self.upper) else self.upper ** (-self.alpha)
            mass = self.scale / self.alpha * (delta ** (-self.alpha) - upper_term)
        return np.where(delta < self.upper, mass, 0.0)

    def inner_moment(self, r: float, delta):
        delta = np.minimum(np.asarray(delta, dtype=float), self.upper)
        if r <= self.alpha:
            return np.full(delta.shape, np.inf)
        return self.scale * delta ** (r - self.alpha) / (r - self.alpha)

    def band_moment(self, p: float, lo: float, hi: float) -> float:
        hi = min(hi, self.upper)
        if hi <= lo:
            return 0.0
        e = p - self.alpha
        if lo == 0.0 and e <= 0.0:
            return np.inf
        if np.isinf(hi) and e >= 0.0:
            return np.inf
        if lo == 0.0:
            return float(self._antiderivative(p, hi))
        if np.isinf(hi):
            return float(-self._antiderivative(p, lo))
        return float(self._antiderivative(p, hi) - self._antiderivative(p, lo))

    def fingerprint(self) -> str:
        return f"powerlaw(alpha={self.alpha!r},scale={self.scale!r},upper={self.upper!r})"


class TabulatedProfile(RadialProfile):
    """
    Arbitrary density on [lower, upper] with 0 < lower < upper < inf.

    Moments are read from cumulative trapezoid tables on log-spaced knots;
    the total mass is cross-checked against adaptive quadrature.
    """

    def __init__(self, density_fn: Callable[[np.ndarray], np.ndarray], lower: float, upper: float,
                 label: str = "tabulated", knots: Optional[int] = None):
        if not (0.0 < lower < upper < np.inf):
            raise InvalidParams("tabulated profiles need 0 < lower < upper < inf")
        self.density_fn = density_fn
        self.lower = float(lower)
        self.upper = float(upper)
        self.label = label
        self.knots = int(knots or Config.RADIAL_KNOTS)

        self._log_knots = np.linspace(np.log(self.lower), np.log(self.upper), self.knots)
        self._radii = np.exp(self._log_knots)
        self._weights = np.asarray(density_fn(self._radii), dtype=float) * self._radii
        if np.any(self._weights < 0) or not np.all(np.isfinite(self._weights)):
            raise InvalidParams(f"profile {label!r} must be finite and nonnegative on its support")
        self._tables: Dict[float, np.ndarray] = {}

        self._mass = float(self._table(0.0)[-1])
        self._check_against_quadrature()

    def _check_against_quadrature(self):
        result = integrate.quad(lambda x: float(self.density_fn(np.array(x))), self.lower, self.upper,
                                epsabs=Config.QUAD_EPSABS, epsrel=1e-8, limit=Config.QUAD_LIMIT,
                                full_output=1)
        value, abserr = result[0], result[1]
        if len(result) > 3 and abserr > 1e-6 * max(abs(value), 1.0):
            raise NonConvergentQuadrature(f"profile {self.label!r}: {result[3]}")
        if value > 0 and abs(value - self._mass) > 1e-4 * value:
            logger.warning("Knot table for %s deviates from quadrature: %.6g vs %.6g",
                           self.label, self._mass, value)

    def _table(self, p: float) -> np.ndarray:
        if p not in self._tables:
            self._tables[p] = integrate.cumulative_trapezoid(
                self._weights * self._radii ** p, self._log_knots, initial=0.0)
        return self._tables[p]

    def _cumulative(self, p: float, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        with np.errstate(divide='ignore'):
            logs = np.log(np.clip(x, self.lower, self.upper))
        return np.interp(logs, self._log_knots, self._table(p))

    def density(self, rho):
        rho = np.asarray(rho, dtype=float)
        inside = (rho >= self.lower) & (rho <= self.upper)
        safe = np.where(inside, rho, self.lower)
        return np.where(inside, self.density_fn(safe), 0.0)

    def tail_mass(self, delta):
        return self._mass - self._cumulative(0.0, delta)

    def inner_moment(self, r: float, delta):
        return self._cumulative(r, delta)

    def band_moment(self, p: float, lo: float, hi: float) -> float:
        if hi <= lo:
            return 0.0
        return float(self._cumulative(p, hi) - self._cumulative(p, lo))

    def fingerprint(self) -> str:
        return f"tabulated(label={self.label!r},lower={self.lower!r},upper={self.upper!r},mass={self._mass!r})"
