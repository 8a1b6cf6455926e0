#!/usr/bin/env python3
"""
Direction Lattices and Cones
============================

Deterministic lattices on the unit sphere used for every inf/sup over
directions, and the two-sided cone V(v, aperture).
"""

from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

import numpy as np
from scipy.stats import norm, qmc

from config.settings import Config
from ..errors import InvalidAperture, InvalidParams

AXIS_TOLERANCE = 1e-12


def validate_aperture(aperture: float) -> float:
    """Raise InvalidAperture unless 0 < aperture < 1"""
    if not (0.0 < aperture < 1.0):
        raise InvalidAperture(f"aperture must lie in (0, 1), got {aperture}")
    return float(aperture)


@dataclass(frozen=True)
class Cone:
    """Two-sided cone {u : |(u, axis)| >= aperture * |u|}"""
    axis: tuple
    aperture: float

    def __post_init__(self):
        axis = np.asarray(self.axis, dtype=float)
        if abs(np.linalg.norm(axis) - 1.0) > AXIS_TOLERANCE:
            raise InvalidParams(f"cone axis must be a unit vector, |v| = {np.linalg.norm(axis)}")
        validate_aperture(self.aperture)
        object.__setattr__(self, 'axis', tuple(float(c) for c in axis))

    @classmethod
    def around(cls, direction, aperture: float) -> "Cone":
        """Build a cone after normalizing the direction"""
        v = np.asarray(direction, dtype=float)
        n = np.linalg.norm(v)
        if n == 0.0:
            raise InvalidParams("cone axis must be nonzero")
        return cls(tuple(v / n), aperture)

    @property
    def dim(self) -> int:
        return len(self.axis)

    def contains(self, points: np.ndarray) -> np.ndarray:
        """Membership mask for an (n, m) array of points"""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        proj = np.abs(pts @ np.asarray(self.axis))
        return proj >= self.aperture * np.linalg.norm(pts, axis=1)


@lru_cache(maxsize=32)
def _cached_grid(dim: int, count: int) -> np.ndarray:
    if dim == 1:
        return np.array([[-1.0], [1.0]])

    if dim == 2:
        # half circle suffices: cones are two-sided
        angles = np.pi * np.arange(count) / count
        return np.column_stack([np.cos(angles), np.sin(angles)])

    if dim == 3:
        # Fibonacci lattice
        k = np.arange(count) + 0.5
        z = 1.0 - 2.0 * k / count
        radius = np.sqrt(1.0 - z ** 2)
        phi = np.pi * (1.0 + np.sqrt(5.0)) * k
        return np.column_stack([radius * np.cos(phi), radius * np.sin(phi), z])

    sampler = qmc.Sobol(d=dim, scramble=False)
    points = sampler.random(count + 1)[1:]
    gauss = norm.ppf(np.clip(points, 1e-12, 1 - 1e-12))
    return gauss / np.linalg.norm(gauss, axis=1, keepdims=True)


def direction_grid(dim: int, count: Optional[int] = None) -> np.ndarray:
    """
    Deterministic direction lattice on S_m.

    m = 1 gives exactly {-1, +1}; m = 2 an equiangular half circle;
    m = 3 a Fibonacci lattice; higher dimensions normalized Sobol points.
    """
    if dim < 1:
        raise InvalidParams(f"dimension must be positive, got {dim}")
    count = int(count or Config.DIRECTION_COUNT)
    grid = _cached_grid(dim, count)
    grid.setflags(write=False)
    return grid


def sphere_quadrature(dim: int, count: Optional[int] = None) -> np.ndarray:
    """Equal-weight nodes approximating the uniform law on S_m"""
    if dim == 1:
        return np.array([[-1.0], [1.0]])
    if dim == 2:
        count = count or 720
        angles = 2.0 * np.pi * (np.arange(count) + 0.5) / count
        return np.column_stack([np.cos(angles), np.sin(angles)])
    if dim == 3:
        return direction_grid(3, count or 2048)
    return direction_grid(dim, count or 4096)
