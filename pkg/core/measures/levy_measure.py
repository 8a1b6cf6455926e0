#!/usr/bin/env python3
"""
Levy Measures
=============

Symbolic-plus-numeric Levy measures on R^m minus the origin: truncated
atomic sequences, radial densities with an angular law, and positive
mixtures. Every functional the lab needs is computed here, either by
exact atom summation or from the closed forms of the radial profile.

Moments are returned in normalized form, i.e. the integral of
(|(u, v)| / eps ^ 1)^r, which stays representable for eps far below the
point where eps^r underflows.
"""

import hashlib
import logging
from abc import ABC, abstractmethod
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.special import gammaln

from config.settings import Config
from ..errors import InvalidParams
from .directions import sphere_quadrature
from .profiles import PowerLawProfile, RadialProfile

logger = logging.getLogger(__name__)


def _as_eps(eps) -> np.ndarray:
    eps = np.atleast_1d(np.asarray(eps, dtype=float))
    if np.any(eps <= 0):
        raise InvalidParams("eps values must be positive")
    return eps


class LevyMeasure(ABC):
    """Abstract Levy measure on R^m minus the origin"""

    dim: int
    tail_bound: float = 0.0
    label: str = "measure"

    def __init__(self):
        self.reference: Dict[str, float] = {}

    # -- functionals every kind implements ---------------------------------

    @abstractmethod
    def norm_moments(self, r: float, eps) -> np.ndarray:
        """Integral of (|u|/eps ^ 1)^r for each eps, shape (E,)"""
        pass

    @abstractmethod
    def projected_moments(self, r: float, eps, directions: np.ndarray, aperture: float = 0.0) -> np.ndarray:
        """Integral over V(v, aperture) of (|(u,v)|/eps ^ 1)^r, shape (k, E)"""
        pass

    @abstractmethod
    def cone_masses(self, directions: np.ndarray, aperture: float, floors) -> np.ndarray:
        """Mass of V(v, aperture) restricted to |u| >= floor, shape (k, F)"""
        pass

    @abstractmethod
    def mass_between(self, lo: float, hi: float = np.inf) -> float:
        """Mass of the annulus lo <= |u| < hi"""
        pass

    @abstractmethod
    def norm_power_moment(self, p: float, lo: float, hi: float = np.inf) -> float:
        """Integral of |u|^p over lo <= |u| < hi"""
        pass

    @abstractmethod
    def mean_between(self, lo: float, hi: float) -> np.ndarray:
        """Vector integral of u over lo <= |u| < hi"""
        pass

    @abstractmethod
    def second_moment_matrix(self, lo: float, hi: float) -> np.ndarray:
        """Matrix integral of u u^T over lo <= |u| < hi"""
        pass

    @abstractmethod
    def componentwise_compensator(self, eps: float) -> np.ndarray:
        """M^i = integral of u^i over {eps <= |u^i|, |u| <= 1}"""
        pass

    @abstractmethod
    def discretize(self, lo: float, hi: float = np.inf) -> Tuple[np.ndarray, np.ndarray]:
        """Point masses (points, masses) representing the measure on lo <= |u| < hi"""
        pass

    @abstractmethod
    def fingerprint(self) -> str:
        pass

    @abstractmethod
    def describe(self) -> Dict[str, Any]:
        pass

    # -- derived functionals --------------------------------------------------

    def retained_mass(self, eps: float) -> float:
        """Mass of {|u| >= eps}, the intensity of the simulated jumps"""
        return self.mass_between(eps, np.inf)

    def annulus_mass(self, lo: float, hi: float) -> float:
        return self.mass_between(lo, hi)

    def total_mass(self) -> float:
        return self.mass_between(0.0, np.inf)

    def is_finite(self) -> bool:
        return bool(np.isfinite(self.total_mass()))

    def integrability(self) -> float:
        """Integral of (|u|^2 ^ 1)"""
        return self.norm_power_moment(2.0, 0.0, 1.0) + self.mass_between(1.0, np.inf)

    def compensator(self, eps: float, componentwise: bool = True) -> np.ndarray:
        if componentwise:
            return self.componentwise_compensator(eps)
        return self.mean_between(eps, np.nextafter(1.0, 2.0))

    def small_jump_covariance(self, eps: float) -> np.ndarray:
        return self.second_moment_matrix(0.0, eps)

    def big_jump_mean(self) -> np.ndarray:
        return self.mean_between(np.nextafter(1.0, 2.0), np.inf)

    def one_sided(self) -> bool:
        """True for m = 1 measures carried by one half-line"""
        return False

    def scaled(self, factor: float) -> "Mixture":
        return Mixture([(factor, self)])

    def digest(self) -> str:
        return hashlib.md5(self.fingerprint().encode()).hexdigest()


class AngularLaw:
    """Probability law on S_m with quadrature nodes for integrals"""

    def __init__(self, nodes: np.ndarray, probs: np.ndarray, kind: str = 'discrete'):
        nodes = np.atleast_2d(np.asarray(nodes, dtype=float))
        probs = np.asarray(probs, dtype=float)
        if nodes.shape[0] != probs.shape[0] or np.any(probs < 0):
            raise InvalidParams("angular law needs one nonnegative probability per node")
        norms = np.linalg.norm(nodes, axis=1)
        if np.any(norms == 0):
            raise InvalidParams("angular nodes must be nonzero")
        self.nodes = nodes / norms[:, None]
        self.probs = probs / probs.sum()
        self.kind = kind

    @classmethod
    def uniform(cls, dim: int) -> "AngularLaw":
        nodes = sphere_quadrature(dim)
        return cls(nodes, np.full(len(nodes), 1.0 / len(nodes)), kind='uniform')

    @classmethod
    def symmetric(cls, axis) -> "AngularLaw":
        axis = np.asarray(axis, dtype=float)
        return cls(np.vstack([axis, -axis]), np.array([0.5, 0.5]))

    @property
    def dim(self) -> int:
        return self.nodes.shape[1]

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        if self.kind == 'uniform' and self.dim > 1:
            g = rng.standard_normal((n, self.dim))
            return g / np.linalg.norm(g, axis=1, keepdims=True)
        idx = rng.choice(len(self.probs), size=n, p=self.probs)
        return self.nodes[idx]

    def fingerprint(self) -> str:
        if self.kind == 'uniform':
            return f"uniform({self.dim})"
        digest = hashlib.md5(self.nodes.tobytes() + self.probs.tobytes()).hexdigest()
        return f"discrete({digest})"


class AtomicSequence(LevyMeasure):
    """Weighted atoms sum_k w_k delta_{u_k}, possibly a truncated infinite sequence"""

    def __init__(self, locations, weights, infinite: bool = False, tail_bound: float = 0.0,
                 label: str = "atoms", n_max: Optional[int] = None):
        super().__init__()
        locations = np.asarray(locations, dtype=float)
        if locations.ndim == 1:
            locations = locations[:, None]
        weights = np.asarray(weights, dtype=float)
        if locations.shape[0] != weights.shape[0]:
            raise InvalidParams("one weight per atom is required")
        if np.any(weights <= 0):
            raise InvalidParams("atom weights must be strictly positive")
        norms = np.linalg.norm(locations, axis=1)
        if np.any(norms == 0):
            raise InvalidParams("atom locations must be nonzero")

        self.locations = locations
        self.weights = weights
        self.norms = norms
        self.dim = locations.shape[1]
        self.infinite = bool(infinite)
        self.tail_bound = float(tail_bound)
        self.label = label
        self.n_max = n_max if n_max is not None else len(weights)

    def norm_moments(self, r, eps):
        eps = _as_eps(eps)
        ratio = np.minimum(self.norms[:, None] / eps[None, :], 1.0)
        return self.weights @ ratio ** r

    def projected_moments(self, r, eps, directions, aperture=0.0):
        eps = _as_eps(eps)
        directions = np.atleast_2d(directions)
        proj = np.abs(self.locations @ directions.T)
        inside = proj >= aperture * self.norms[:, None]
        weighted = self.weights[:, None] * inside
        out = np.empty((directions.shape[0], eps.size))
        for j, e in enumerate(eps):
            out[:, j] = np.sum(weighted * np.minimum(proj / e, 1.0) ** r, axis=0)
        return out

    def cone_masses(self, directions, aperture, floors):
        floors = np.atleast_1d(np.asarray(floors, dtype=float))
        directions = np.atleast_2d(directions)
        proj = np.abs(self.locations @ directions.T)
        inside = (proj >= aperture * self.norms[:, None]) * self.weights[:, None]
        retained = self.norms[:, None] >= floors[None, :]
        return inside.T @ retained

    def _band(self, lo, hi) -> np.ndarray:
        return (self.norms >= lo) & (self.norms < hi)

    def mass_between(self, lo, hi=np.inf):
        return float(self.weights[self._band(lo, hi)].sum())

    def norm_power_moment(self, p, lo, hi=np.inf):
        band = self._band(lo, hi)
        return float(np.sum(self.weights[band] * self.norms[band] ** p))

    def mean_between(self, lo, hi):
        band = self._band(lo, hi)
        return self.weights[band] @ self.locations[band]

    def second_moment_matrix(self, lo, hi):
        band = self._band(lo, hi)
        loc = self.locations[band]
        return (loc * self.weights[band][:, None]).T @ loc

    def componentwise_compensator(self, eps):
        small = self.norms <= 1.0
        mask = (np.abs(self.locations) >= eps) & small[:, None]
        return np.sum(self.weights[:, None] * self.locations * mask, axis=0)

    def discretize(self, lo: float, hi: float = np.inf) -> Tuple[np.ndarray, np.ndarray]:
        band = self._band(lo, hi)
        return self.locations[band], self.weights[band]

    def one_sided(self) -> bool:
        if self.dim != 1:
            return False
        signs = np.sign(self.locations[:, 0])
        return bool(np.all(signs > 0) or np.all(signs < 0))

    def min_norm(self) -> float:
        return float(self.norms.min())

    def fingerprint(self) -> str:
        digest = hashlib.md5(self.locations.tobytes() + self.weights.tobytes()).hexdigest()
        return f"atoms({self.label},{self.dim},{digest})"

    def describe(self) -> Dict[str, Any]:
        return {
            'kind': 'atomic_sequence',
            'label': self.label,
            'dim': self.dim,
            'atoms': int(len(self.weights)),
            'infinite': self.infinite,
            'n_max': self.n_max,
            'tail_bound': self.tail_bound,
        }


class RadialDensity(LevyMeasure):
    """Product measure pi(rho) d rho x angular law on S_m"""

    def __init__(self, profile: RadialProfile, angular: AngularLaw, label: str = "radial"):
        super().__init__()
        self.profile = profile
        self.angular = angular
        self.dim = angular.dim
        self.label = label

    def norm_moments(self, r, eps):
        return np.asarray(self.profile.normalized_inner(r, _as_eps(eps)), dtype=float)

    def projected_moments(self, r, eps, directions, aperture=0.0):
        eps = _as_eps(eps)
        directions = np.atleast_2d(directions)
        cosines = np.abs(self.angular.nodes @ directions.T)
        inside = (cosines >= aperture) & (cosines > 0)
        safe = np.where(inside, cosines, 1.0)
        weights = self.angular.probs[:, None] * inside
        out = np.empty((directions.shape[0], eps.size))
        for j, e in enumerate(eps):
            # (rho c / eps ^ 1)^r integrates to the normalized inner moment at eps / c
            values = self.profile.normalized_inner(r, e / safe)
            out[:, j] = np.sum(np.where(inside, weights * values, 0.0), axis=0)
        return out

    def cone_masses(self, directions, aperture, floors):
        floors = np.atleast_1d(np.asarray(floors, dtype=float))
        directions = np.atleast_2d(directions)
        cosines = np.abs(self.angular.nodes @ directions.T)
        cone_prob = self.angular.probs @ ((cosines >= aperture) & (cosines > 0))
        return np.outer(cone_prob, self.profile.tail_mass(floors))

    def mass_between(self, lo, hi=np.inf):
        hi_mass = 0.0 if np.isinf(hi) else float(self.profile.tail_mass(hi))
        return float(self.profile.tail_mass(lo)) - hi_mass

    def norm_power_moment(self, p, lo, hi=np.inf):
        return self.profile.band_moment(p, lo, hi)

    def mean_between(self, lo, hi):
        direction_mean = self.angular.probs @ self.angular.nodes
        if self.angular.kind == "uniform" or np.allclose(direction_mean, 0.0, atol=1e-14):
            return np.zeros(self.dim)
        return self.profile.band_moment(1.0, lo, hi) * direction_mean

    def second_moment_matrix(self, lo, hi):
        nodes = self.angular.nodes
        angular_second = (nodes * self.angular.probs[:, None]).T @ nodes
        return self.profile.band_moment(2.0, lo, hi) * angular_second

    def componentwise_compensator(self, eps):
        nodes, probs = self.angular.nodes, self.angular.probs
        if self.angular.kind == "uniform":
            # symmetric law
            return np.zeros(self.dim)
        out = np.zeros(self.dim)
        for theta, q in zip(nodes, probs):
            for i, c in enumerate(theta):
                if abs(c) > 0 and eps / abs(c) < 1.0:
                    out[i] += q * c * self.profile.band_moment(1.0, eps / abs(c), np.nextafter(1.0, 2.0))
        return out

    def discretize(self, lo: float, hi: float = np.inf,
                   radial_knots: int = 256) -> Tuple[np.ndarray, np.ndarray]:
        """Shell-by-node point masses; the tail beyond the last shell sits on its outer edge"""
        if lo <= 0:
            raise InvalidParams("radial measures can only be discretized away from the origin")
        reference = float(self.profile.tail_mass(lo))
        top = min(hi, self.profile.upper)
        if np.isinf(top):
            top = max(lo, 1.0)
            while float(self.profile.tail_mass(top)) > 1e-12 * reference and top < 1e12:
                top *= 10.0
        if top <= lo:
            return np.zeros((0, self.dim)), np.zeros(0)
        edges = np.geomspace(lo, top, radial_knots + 1)
        tails = self.profile.tail_mass(edges)
        shells = tails[:-1] - tails[1:]
        if np.isinf(hi):
            shells[-1] += tails[-1]
        mids = np.sqrt(edges[:-1] * edges[1:])
        points = (mids[:, None, None] * self.angular.nodes[None, :, :]).reshape(-1, self.dim)
        masses = (shells[:, None] * self.angular.probs[None, :]).reshape(-1)
        keep = masses > 0
        return points[keep], masses[keep]

    def one_sided(self) -> bool:
        if self.dim != 1:
            return False
        signs = np.sign(self.angular.nodes[self.angular.probs > 0, 0])
        return bool(np.all(signs > 0) or np.all(signs < 0))

    def fingerprint(self) -> str:
        return f"radial({self.label},{self.profile.fingerprint()},{self.angular.fingerprint()})"

    def describe(self) -> Dict[str, Any]:
        return {
            'kind': 'radial_density',
            'label': self.label,
            'dim': self.dim,
            'profile': self.profile.fingerprint(),
            'angular': self.angular.fingerprint(),
        }


class Mixture(LevyMeasure):
    """Positive combination sum_i c_i Pi_i"""

    def __init__(self, components: Sequence[Tuple[float, LevyMeasure]], label: str = "mixture"):
        super().__init__()
        if not components:
            raise InvalidParams("a mixture needs at least one component")
        dims = {m.dim for _, m in components}
        if len(dims) != 1:
            raise InvalidParams(f"mixture components disagree on dimension: {sorted(dims)}")
        for c, _ in components:
            if c <= 0:
                raise InvalidParams("mixture weights must be strictly positive")
        self.components: List[Tuple[float, LevyMeasure]] = [(float(c), m) for c, m in components]
        self.dim = dims.pop()
        self.label = label
        self.tail_bound = sum(c * m.tail_bound for c, m in self.components)
        self.infinite = any(getattr(m, 'infinite', False) for _, m in self.components)

    def _sum(self, fn):
        return sum(c * fn(m) for c, m in self.components)

    def norm_moments(self, r, eps):
        return self._sum(lambda m: m.norm_moments(r, eps))

    def projected_moments(self, r, eps, directions, aperture=0.0):
        return self._sum(lambda m: m.projected_moments(r, eps, directions, aperture))

    def cone_masses(self, directions, aperture, floors):
        return self._sum(lambda m: m.cone_masses(directions, aperture, floors))

    def mass_between(self, lo, hi=np.inf):
        return float(self._sum(lambda m: m.mass_between(lo, hi)))

    def norm_power_moment(self, p, lo, hi=np.inf):
        return float(self._sum(lambda m: m.norm_power_moment(p, lo, hi)))

    def mean_between(self, lo, hi):
        return self._sum(lambda m: m.mean_between(lo, hi))

    def second_moment_matrix(self, lo, hi):
        return self._sum(lambda m: m.second_moment_matrix(lo, hi))

    def componentwise_compensator(self, eps):
        return self._sum(lambda m: m.componentwise_compensator(eps))

    def discretize(self, lo: float, hi: float = np.inf) -> Tuple[np.ndarray, np.ndarray]:
        parts = [m.discretize(lo, hi) for _, m in self.components]
        points = np.vstack([p for p, _ in parts])
        masses = np.concatenate([c * w for (c, _), (_, w) in zip(self.components, parts)])
        return points, masses

    def one_sided(self) -> bool:
        if self.dim != 1:
            return False
        sides = set()
        for _, m in self.components:
            if not m.one_sided():
                return False
            probe = m.mean_between(0.0, np.inf) if m.is_finite() else m.mean_between(1e-300, 1.0)
            sides.add(np.sign(probe[0]))
        return len(sides) == 1

    def min_norm(self) -> float:
        norms = [m.min_norm() for _, m in self.components if hasattr(m, 'min_norm')]
        return min(norms) if norms else 0.0

    def fingerprint(self) -> str:
        parts = ",".join(f"{c!r}*{m.fingerprint()}" for c, m in self.components)
        return f"mixture({parts})"

    def describe(self) -> Dict[str, Any]:
        return {
            'kind': 'mixture',
            'label': self.label,
            'dim': self.dim,
            'components': [{'weight': c, 'measure': m.describe()} for c, m in self.components],
            'tail_bound': self.tail_bound,
        }


class ZeroMeasure(AtomicSequence):
    """The zero measure; no atoms, every functional vanishes"""

    def __init__(self, dim: int = 1):
        LevyMeasure.__init__(self)
        self.locations = np.zeros((0, dim))
        self.weights = np.zeros(0)
        self.norms = np.zeros(0)
        self.dim = dim
        self.infinite = False
        self.tail_bound = 0.0
        self.label = "zero"
        self.n_max = 0

    def min_norm(self) -> float:
        return np.inf

    def one_sided(self) -> bool:
        return False


# -- builders ---------------------------------------------------------------

def _unit(direction, dim: int) -> np.ndarray:
    if direction is None:
        v = np.zeros(dim)
        v[0] = 1.0
        return v
    v = np.asarray(direction, dtype=float)
    if v.shape != (dim,) or np.linalg.norm(v) == 0:
        raise InvalidParams(f"direction must be a nonzero vector of length {dim}")
    return v / np.linalg.norm(v)


def zero_measure(dim: int = 1) -> ZeroMeasure:
    return ZeroMeasure(dim)


def geometric_atoms(gamma: float, dim: int = 1, direction=None, weight: float = 1.0,
                    n_max: Optional[int] = None) -> AtomicSequence:
    """sum_{n>=1} weight * delta_{gamma^-n v}; order indices all equal weight / ln(gamma)"""
    if gamma <= 1.0:
        raise InvalidParams(f"geometric atoms need gamma > 1, got {gamma}")
    n_max = int(n_max or Config.ATOM_TRUNCATION)
    n = np.arange(1, n_max + 1)
    radii = gamma ** (-n.astype(float))
    v = _unit(direction, dim)
    tail = weight * gamma ** (-(n_max + 1.0)) / (1.0 - 1.0 / gamma)
    measure = AtomicSequence(radii[:, None] * v[None, :], np.full(n_max, float(weight)),
                             infinite=True, tail_bound=tail, label=f"geometric(gamma={gamma:g})",
                             n_max=n_max)
    index = weight / np.log(gamma)
    measure.reference = {'rho': index, 'rho_1': index, 'theta': index}
    return measure


def factorial_atoms(n_max: int = Config.ATOM_TRUNCATION) -> AtomicSequence:
    """sum_{n>=1} n delta_{1/n!}; every upper order index is infinite"""
    n = np.arange(1, n_max + 1)
    radii = np.exp(-gammaln(n + 1.0))
    # dropped atoms carry first moment sum_{n>N} 1/(n-1)! <= 2/N!
    tail = 2.0 * float(np.exp(-gammaln(n_max + 1.0)))
    measure = AtomicSequence(radii[:, None], n.astype(float), infinite=True, tail_bound=tail,
                             label="factorial", n_max=n_max)
    measure.reference = {'rho': np.inf}
    return measure


def parabola_atoms(n_max: int = 20) -> AtomicSequence:
    """sum_{k>=1} delta_{(1/k!, 1/(k!)^2)}: atoms on the parabola y = x^2"""
    k = np.arange(1, n_max + 1)
    x = np.exp(-gammaln(k + 1.0))
    tail = 2.0 * np.sqrt(2.0) * float(np.exp(-gammaln(n_max + 2.0)))
    return AtomicSequence(np.column_stack([x, x ** 2]), np.ones(n_max), infinite=True,
                          tail_bound=tail, label="parabola", n_max=n_max)


def finite_atoms(locations, weights, label: str = "atoms") -> AtomicSequence:
    return AtomicSequence(locations, weights, infinite=False, tail_bound=0.0, label=label)


def stable_measure(alpha: float, dim: int = 1, scale: float = 1.0, upper: float = np.inf,
                   one_sided: bool = False) -> RadialDensity:
    """
    Symmetric alpha-stable type measure.

    In one dimension the density is scale * |u|^(-1-alpha) on each half-line
    (or only the positive one when one_sided). In higher dimensions the
    radial density scale * rho^(-1-alpha) is spread uniformly over S_m.
    """
    if dim == 1:
        if one_sided:
            angular = AngularLaw(np.array([[1.0]]), np.array([1.0]))
            profile = PowerLawProfile(alpha, scale, upper)
        else:
            angular = AngularLaw.symmetric([1.0])
            profile = PowerLawProfile(alpha, 2.0 * scale, upper)
    else:
        angular = AngularLaw.uniform(dim)
        profile = PowerLawProfile(alpha, scale, upper)
    measure = RadialDensity(profile, angular, label=f"stable(alpha={alpha:g})")
    measure.reference = {'rho': np.inf}
    return measure
