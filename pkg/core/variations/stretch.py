#!/usr/bin/env python3
"""
Time Stretches
==============

A time stretch is a bounded function h on the half-line with running
integral Jh(x) = int_0^x h(s) ds. The map T_h moves a time x to z(1), where
z solves z' = Jh(z), z(0) = x; scaling h by c gives T_{ch}, and the family
{T_{ch}} is a one-parameter group.
"""

from dataclasses import dataclass, field
from typing import Any, Callable, Dict, Optional, Tuple

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.integrate import cumulative_trapezoid

from config.settings import Config
from ..errors import InvalidParams


def _smooth_step(x: np.ndarray) -> np.ndarray:
    """C-infinity step: 0 for x <= 0, 1 for x >= 1"""
    x = np.clip(np.asarray(x, dtype=float), 0.0, 1.0)
    with np.errstate(divide='ignore', over='ignore', invalid='ignore'):
        left = np.where(x > 0, np.exp(-1.0 / np.where(x > 0, x, 1.0)), 0.0)
        right = np.where(x < 1, np.exp(-1.0 / np.where(x < 1, 1.0 - x, 1.0)), 0.0)
    return left / (left + right)


def _smooth_step_slope(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    inside = (x > 0) & (x < 1)
    xs = np.where(inside, x, 0.5)
    left = np.exp(-1.0 / xs)
    right = np.exp(-1.0 / (1.0 - xs))
    slope = (left / xs ** 2 * right + left * right / (1.0 - xs) ** 2) / (left + right) ** 2
    return np.where(inside, slope, 0.0)


@dataclass
class TimeStretch:
    """h, its running integral Jh and the closed interval outside which h vanishes"""
    h_fn: Callable[[np.ndarray], np.ndarray]
    J_fn: Callable[[np.ndarray], np.ndarray]
    support: Tuple[float, float]
    total: float
    kind: str = "custom"
    params: Dict[str, Any] = field(default_factory=dict)

    def h(self, t) -> np.ndarray:
        return self.h_fn(np.asarray(t, dtype=float))

    def J(self, t) -> np.ndarray:
        return self.J_fn(np.asarray(t, dtype=float))

    @property
    def compactly_vanishing(self) -> bool:
        """Jh = 0 beyond the support"""
        return abs(self.total) <= 1e-15

    def c_inf(self, scale: float = 1.0) -> float:
        """lim (T_{scale h} t - t): beyond the support the map translates by scale * Jh(inf)"""
        return 0.0 if self.compactly_vanishing else float(scale * self.total)

    def scaled(self, factor: float) -> "TimeStretch":
        return TimeStretch(lambda t: factor * self.h_fn(t), lambda t: factor * self.J_fn(t), self.support,
                           factor * self.total, self.kind, dict(self.params, factor=factor))

    def grid_compatible(self, interval: Tuple[float, float], samples: int = 2001) -> bool:
        """Jh > 0 strictly inside the interval and Jh = 0 outside it"""
        a, b = interval
        inner = np.linspace(a, b, samples)[1:-1]
        width = b - a
        outer = np.concatenate([np.linspace(a - width, a, samples // 4),
                                np.linspace(b, b + width, samples // 4)])
        return bool(np.all(self.J(inner) > 0) and np.all(self.J(outer) == 0))

    def describe(self) -> Dict[str, Any]:
        return {'kind': self.kind, 'support': list(self.support), 'total': self.total,
                'params': dict(self.params)}


def indicator_stretch(a: float = 0.0, b: float = 1.0, level: float = 1.0) -> TimeStretch:
    """h = level on [a, b); Jh(z) = level * clip(z - a, 0, b - a)"""
    if not 0.0 <= a < b:
        raise InvalidParams(f"indicator stretch needs 0 <= a < b, got ({a}, {b})")

    def h(t):
        return np.where((t >= a) & (t < b), level, 0.0)

    def J(t):
        return level * np.clip(t - a, 0.0, b - a)

    return TimeStretch(h, J, (a, b), level * (b - a), "indicator", {'a': a, 'b': b, 'level': level})


def bump_stretch(t0: float, t1: float, beta: float, level: float = 1.0) -> TimeStretch:
    """
    Jh ramps smoothly from 0 to level on (t0, t0 + beta), stays at level up
    to t1 - beta and ramps back to 0 at t1; h = Jh'. Jh vanishes off (t0, t1).
    """
    if not 0.0 <= t0 < t1:
        raise InvalidParams(f"bump stretch needs 0 <= t0 < t1, got ({t0}, {t1})")
    if not 0.0 < beta <= 0.5 * (t1 - t0):
        raise InvalidParams(f"ramp width must lie in (0, (t1 - t0)/2], got {beta}")

    def J(t):
        return level * _smooth_step((t - t0) / beta) * _smooth_step((t1 - t) / beta)

    def h(t):
        up = _smooth_step_slope((t - t0) / beta) / beta * _smooth_step((t1 - t) / beta)
        down = _smooth_step((t - t0) / beta) * _smooth_step_slope((t1 - t) / beta) / beta
        return level * (up - down)

    return TimeStretch(h, J, (t0, t1), 0.0, "bump", {'t0': t0, 't1': t1, 'beta': beta, 'level': level})


def tabulated_stretch(h_fn: Callable[[np.ndarray], np.ndarray], support: Tuple[float, float],
                      knots: Optional[int] = None) -> TimeStretch:
    """Jh tabulated by the trapezoid rule on a uniform grid over [0, s1]"""
    s0, s1 = float(support[0]), float(support[1])
    if not 0.0 <= s0 < s1:
        raise InvalidParams(f"support must satisfy 0 <= s0 < s1, got {support}")
    knots = int(knots or Config.STRETCH_KNOTS)
    grid = np.linspace(0.0, s1, knots)
    values = np.where((grid >= s0) & (grid <= s1), h_fn(grid), 0.0)
    table = cumulative_trapezoid(values, grid, initial=0.0)
    total = float(table[-1])

    def h(t):
        t = np.asarray(t, dtype=float)
        return np.where((t >= s0) & (t <= s1), h_fn(t), 0.0)

    def J(t):
        return np.interp(t, grid, table, left=0.0, right=total)

    return TimeStretch(h, J, (s0, s1), total, "tabulated", {'knots': knots})


def stretch_flow(stretch: TimeStretch, scale, x, s_end: float = 1.0, step: Optional[float] = None) -> np.ndarray:
    """z(s_end) for z' = scale * Jh(z), z(0) = x; scale may be an array matching x"""
    step = float(step or Config.STRETCH_STEP)
    z = np.array(x, dtype=float, copy=True)
    scale = np.asarray(scale, dtype=float)
    if s_end == 0 or not np.any(scale != 0):
        return z
    n_steps = max(int(np.ceil(abs(s_end) / step)), 1)
    ds = s_end / n_steps

    def rhs(v):
        return scale * stretch.J(v)

    for _ in range(n_steps):
        k1 = rhs(z)
        k2 = rhs(z + 0.5 * ds * k1)
        k3 = rhs(z + 0.5 * ds * k2)
        k4 = rhs(z + ds * k3)
        z = z + ds / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return z


def time_stretch_map(stretch: TimeStretch, scale, x, step: Optional[float] = None) -> np.ndarray:
    """T_{scale h} x"""
    return stretch_flow(stretch, scale, x, 1.0, step)


def stretch_rate(stretch: TimeStretch, t, scale: float = 1.0, method: str = "log_derivative",
                 step: Optional[float] = None) -> np.ndarray:
    """
    r(t) = int_0^1 scale * h(T_{s scale h} t) ds, the logarithm of d/dt T_{scale h} t.

    The default evaluates ln(Jh(T t) / Jh(t)), which is exact for the
    autonomous flow and insensitive to jumps of h; method="quadrature" uses
    Gauss-Legendre nodes along the orbit and suits smooth h.
    """
    t = np.atleast_1d(np.asarray(t, dtype=float))
    if scale == 0:
        return np.zeros_like(t)
    if method == "quadrature":
        return _rate_quadrature(stretch, t, scale, step)
    if method != "log_derivative":
        raise InvalidParams(f"unknown stretch rate method {method!r}")

    start = stretch.J(t)
    moving = start != 0
    out = scale * stretch.h(t)  # fixed points: the orbit stays at t
    if np.any(moving):
        end = stretch.J(time_stretch_map(stretch, scale, t[moving], step))
        with np.errstate(divide='ignore', invalid='ignore'):
            out[moving] = np.log(end / start[moving])
    return out


def _rate_quadrature(stretch: TimeStretch, t: np.ndarray, scale: float, step: Optional[float]) -> np.ndarray:
    nodes, weights = gauss_legendre_rule()
    z = t.copy()
    previous = 0.0
    total = np.zeros_like(t)
    for s, w in zip(nodes, weights):
        z = stretch_flow(stretch, scale, z, s - previous, step)
        previous = s
        total += w * stretch.h(z)
    return scale * total


def gauss_legendre_rule(n: Optional[int] = None) -> Tuple[np.ndarray, np.ndarray]:
    """Nodes and weights on [0, 1]"""
    nodes, weights = leggauss(int(n or Config.GAUSS_LEGENDRE_NODES))
    return 0.5 * (nodes + 1.0), 0.5 * weights
