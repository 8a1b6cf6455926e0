#!/usr/bin/env python3
"""
Mark Samplers
=============

Samplers for jump marks drawn from a Levy measure restricted to
{|u| >= eps_cut} and normalized. Atoms use Vose alias tables, radial
densities invert the tail mass on a log-spaced radial grid, mixtures pick a
component first. Samplers are memoised per (measure, eps_cut).
"""

import hashlib
import logging
import threading
import time
from abc import ABC, abstractmethod
from typing import Any, Dict, List, Optional

import numpy as np

from config.settings import Config
from ..errors import InvalidParams
from ..measures.levy_measure import AtomicSequence, AngularLaw, LevyMeasure, Mixture, RadialDensity
from ..measures.profiles import RadialProfile

logger = logging.getLogger(__name__)


class AliasTable:
    """Vose alias table for O(1) draws from a finite distribution"""

    def __init__(self, weights):
        weights = np.asarray(weights, dtype=float)
        n = weights.size
        if n == 0:
            raise InvalidParams("alias table needs at least one weight")
        scaled = weights * n / weights.sum()
        prob = np.ones(n)
        alias = np.arange(n)
        small = [i for i in range(n) if scaled[i] < 1.0]
        large = [i for i in range(n) if scaled[i] >= 1.0]
        while small and large:
            s, l = small.pop(), large.pop()
            prob[s] = scaled[s]
            alias[s] = l
            scaled[l] = scaled[l] + scaled[s] - 1.0
            if scaled[l] < 1.0:
                small.append(l)
            else:
                large.append(l)
        # leftovers are 1 up to rounding
        self.prob = prob
        self.alias = alias
        self.size = n

    def draw(self, uniforms: np.ndarray) -> np.ndarray:
        """Map an (n, 2) array of uniforms to table indices"""
        slot = np.minimum((uniforms[:, 0] * self.size).astype(np.int64), self.size - 1)
        keep = uniforms[:, 1] < self.prob[slot]
        return np.where(keep, slot, self.alias[slot])

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        return self.draw(rng.random((int(n), 2)))


class MarkSampler(ABC):
    """Draws marks from the normalized restriction of a measure to |u| >= eps_cut"""

    dim: int
    rate: float
    eps_cut: float

    @abstractmethod
    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        """Array of shape (n, dim)"""
        pass

    def describe(self) -> Dict[str, Any]:
        return {'sampler': type(self).__name__, 'rate': self.rate, 'eps_cut': self.eps_cut}


class AtomMarkSampler(MarkSampler):
    def __init__(self, points: np.ndarray, masses: np.ndarray, eps_cut: float):
        self.points = np.atleast_2d(np.asarray(points, dtype=float))
        self.masses = np.asarray(masses, dtype=float)
        self.dim = self.points.shape[1]
        self.rate = float(self.masses.sum())
        self.eps_cut = float(eps_cut)
        self.table = AliasTable(self.masses) if self.masses.size else None

    def sample(self, n, rng):
        if n == 0 or self.table is None:
            return np.zeros((0, self.dim))
        return self.points[self.table.sample(n, rng)]

    def probabilities(self) -> np.ndarray:
        return self.masses / self.rate if self.rate > 0 else self.masses


class RadialMarkSampler(MarkSampler):
    """Inverse tail-mass sampling of the radius, then an independent direction"""

    def __init__(self, profile: RadialProfile, angular: AngularLaw, eps_cut: float,
                 knots: Optional[int] = None):
        self.profile = profile
        self.angular = angular
        self.dim = angular.dim
        self.eps_cut = float(eps_cut)
        knots = int(knots or Config.RADIAL_KNOTS)

        self.rate = float(profile.tail_mass(self.eps_cut))
        top = profile.upper
        if np.isinf(top):
            top = max(10.0 * self.eps_cut, 1.0)
            while float(profile.tail_mass(top)) > 1e-12 * self.rate and top < 1e15:
                top *= 10.0
        self.radii = np.geomspace(self.eps_cut, top, knots)
        tails = np.asarray(profile.tail_mass(self.radii), dtype=float)
        if self.rate > 0:
            cdf = 1.0 - tails / self.rate
        else:
            cdf = np.linspace(0.0, 1.0, knots)
        cdf[0], cdf[-1] = 0.0, 1.0
        self.cdf = np.maximum.accumulate(cdf)
        self.log_radii = np.log(self.radii)

        self.direction_table = None
        if angular.kind != 'uniform' or self.dim == 1:
            self.direction_table = AliasTable(angular.probs)

    def sample_radii(self, uniforms: np.ndarray) -> np.ndarray:
        return np.exp(np.interp(uniforms, self.cdf, self.log_radii))

    def sample(self, n, rng):
        if n == 0 or self.rate == 0:
            return np.zeros((0, self.dim))
        u = rng.random((int(n), 3))
        radii = self.sample_radii(u[:, 0])
        if self.direction_table is not None:
            directions = self.angular.nodes[self.direction_table.draw(u[:, 1:])]
        else:
            g = rng.standard_normal((int(n), self.dim))
            directions = g / np.linalg.norm(g, axis=1, keepdims=True)
        return radii[:, None] * directions


class MixtureMarkSampler(MarkSampler):
    def __init__(self, parts: List[MarkSampler], eps_cut: float):
        self.parts = [p for p in parts if p.rate > 0]
        self.dim = parts[0].dim
        self.eps_cut = float(eps_cut)
        self.rate = float(sum(p.rate for p in self.parts))
        self.table = AliasTable([p.rate for p in self.parts]) if self.parts else None

    def sample(self, n, rng):
        if n == 0 or self.table is None:
            return np.zeros((0, self.dim))
        choice = self.table.sample(n, rng)
        out = np.empty((int(n), self.dim))
        for k, part in enumerate(self.parts):
            idx = np.flatnonzero(choice == k)
            if idx.size:
                out[idx] = part.sample(idx.size, rng)
        return out

    def describe(self) -> Dict[str, Any]:
        info = super().describe()
        info['parts'] = [p.describe() for p in self.parts]
        return info


def build_sampler(measure: LevyMeasure, eps_cut: float) -> MarkSampler:
    """Construct the sampler for the restriction of measure to |u| >= eps_cut"""
    if isinstance(measure, AtomicSequence):
        points, masses = measure.discretize(eps_cut)
        if points.shape[0] == 0:
            points = np.zeros((0, measure.dim))
        return AtomMarkSampler(points, masses, eps_cut)
    if isinstance(measure, RadialDensity):
        return RadialMarkSampler(measure.profile, measure.angular, eps_cut)
    if isinstance(measure, Mixture):
        parts = []
        for weight, component in measure.components:
            part = build_sampler(component, eps_cut)
            part.rate *= weight
            parts.append(part)
        return MixtureMarkSampler(parts, eps_cut)
    points, masses = measure.discretize(eps_cut)
    return AtomMarkSampler(points, masses, eps_cut)


class MarkSamplerCache:
    """Thread-safe LRU cache of samplers keyed by an md5 of (measure, eps_cut)"""

    def __init__(self, max_size: Optional[int] = None):
        self.cache: Dict[str, Dict[str, Any]] = {}
        self.max_size = int(max_size or Config.SAMPLER_CACHE_SIZE)
        self.hits = 0
        self.misses = 0
        self.lock = threading.Lock()

    def _generate_key(self, measure: LevyMeasure, eps_cut: float) -> str:
        data = f"{measure.fingerprint()}:{float(eps_cut)!r}"
        return hashlib.md5(data.encode()).hexdigest()

    def get(self, measure: LevyMeasure, eps_cut: float) -> MarkSampler:
        key = self._generate_key(measure, eps_cut)
        with self.lock:
            entry = self.cache.get(key)
            if entry is not None:
                self.hits += 1
                entry['last_access'] = time.time()
                return entry['sampler']
            self.misses += 1

        sampler = build_sampler(measure, eps_cut)
        logger.debug("Built %s for %s at eps_cut=%g", type(sampler).__name__, measure.label, eps_cut)

        with self.lock:
            if key not in self.cache and len(self.cache) >= self.max_size:
                oldest = min(self.cache, key=lambda k: self.cache[k]['last_access'])
                del self.cache[oldest]
            self.cache[key] = {'sampler': sampler, 'created': time.time(), 'last_access': time.time()}
        return sampler

    def clear(self):
        with self.lock:
            self.cache.clear()
            self.hits = 0
            self.misses = 0

    def get_stats(self) -> Dict[str, Any]:
        with self.lock:
            total = self.hits + self.misses
            return {
                'hits': self.hits,
                'misses': self.misses,
                'hit_rate': self.hits / total if total > 0 else 0,
                'size': len(self.cache),
                'max_size': self.max_size,
            }


sampler_cache = MarkSamplerCache()


def get_sampler(measure: LevyMeasure, eps_cut: float) -> MarkSampler:
    return sampler_cache.get(measure, eps_cut)
