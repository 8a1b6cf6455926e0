#!/usr/bin/env python3
"""
Order Indices
=============

Truncated moments, upper/lower order index profiles, extrapolation of the
double limit, the wide cone check and the moment conditions.

All inf/sup over directions are taken on a fixed lattice, so an upper
index profile is an upper bound on the true infimum and a lower index
profile a lower bound on the true supremum.
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional, Sequence, Union

import numpy as np

from ..errors import InsufficientProfile, InvalidParams
from .directions import Cone, direction_grid, validate_aperture
from .levy_measure import LevyMeasure

logger = logging.getLogger(__name__)

SLOPE_TOLERANCE = 0.1
TAIL_FRACTION = 0.4
DEFAULT_APERTURES = (0.5, 0.25, 0.1)
WIDE_CONE_FLOORS = (1e-2, 1e-4, 1e-6, 1e-8)


class IndexKind(Enum):
    """Extrapolated value of an order index"""
    ZERO = "zero"
    FINITE = "finite"
    INFINITE = "infinite"


@dataclass
class IndexClass:
    """Classification of an index profile"""
    kind: IndexKind
    value: Optional[float] = None
    uncertainty: Optional[float] = None
    slope: float = 0.0
    stable: bool = True
    per_aperture: Dict[float, str] = field(default_factory=dict)

    @property
    def is_finite(self) -> bool:
        return self.kind == IndexKind.FINITE

    def effective_value(self) -> float:
        """Numeric stand-in: 0, the finite value, or inf"""
        if self.kind == IndexKind.ZERO:
            return 0.0
        if self.kind == IndexKind.INFINITE:
            return float('inf')
        return float(self.value)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'kind': self.kind.value,
            'value': self.value,
            'uncertainty': self.uncertainty,
            'slope': self.slope,
            'stable': self.stable,
            'per_aperture': {str(k): v for k, v in self.per_aperture.items()},
        }


@dataclass
class IndexProfile:
    """rho_r(aperture, eps) or theta(eps) along a decreasing eps list"""
    power: Union[int, str]
    aperture: Optional[float]
    eps: np.ndarray
    values: np.ndarray
    direction_count: int
    source: Optional[LevyMeasure] = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        self.eps = np.asarray(self.eps, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.eps.size > 1 and np.any(np.diff(self.eps) >= 0):
            raise InvalidParams("eps values of a profile must be strictly decreasing")
        if np.any(self.values < 0):
            raise InvalidParams("index profile values must be nonnegative")

    def to_dict(self) -> Dict[str, Any]:
        return {
            'power': self.power,
            'aperture': self.aperture,
            'direction_count': self.direction_count,
            'eps': self.eps.tolist(),
            'values': [float(v) for v in self.values],
        }


def default_eps_grid(measure: LevyMeasure, n_points: int = 40) -> np.ndarray:
    """
    Decreasing eps list from 1e-2 down to the resolution of the measure.

    For truncated infinite atom sequences the grid stops four decades above
    the smallest retained atom so truncation never shows in the profile.
    """
    floor = 1e-12
    if getattr(measure, 'infinite', False) and hasattr(measure, 'min_norm'):
        floor = max(measure.min_norm() * 1e4, 1e-300)
    floor = min(floor, 1e-5)
    return np.geomspace(1e-2, floor, n_points)


def _validate_eps(eps_list) -> np.ndarray:
    eps = np.asarray(eps_list, dtype=float)
    if np.any(eps <= 0) or np.any(eps >= 1):
        raise InvalidParams("eps values must lie in (0, 1)")
    return eps


def truncated_moment(measure: LevyMeasure, r: int, eps: float, cone: Optional[Cone] = None,
                     direction=None) -> float:
    """
    Integral of (|(u, v)| ^ eps)^r over the cone, or over R^m when no cone
    is given (with the norm |u|, or |(u, v)| when a direction is given).
    """
    if r < 1:
        raise InvalidParams(f"power must be a positive integer, got {r}")
    if eps <= 0:
        raise InvalidParams("eps must be positive")
    if cone is not None:
        normalized = measure.projected_moments(r, [eps], np.asarray([cone.axis]), cone.aperture)[0, 0]
    elif direction is not None:
        v = np.asarray(direction, dtype=float)
        normalized = measure.projected_moments(r, [eps], (v / np.linalg.norm(v))[None, :], 0.0)[0, 0]
    else:
        normalized = measure.norm_moments(r, [eps])[0]
    return float(eps ** r * normalized)


def order_index_profile(measure: LevyMeasure, r: int, varrho: float, eps_list=None,
                        dir_grid: Optional[int] = None) -> IndexProfile:
    """rho_r(aperture, eps) with the infimum over the direction lattice"""
    validate_aperture(varrho)
    eps = _validate_eps(default_eps_grid(measure) if eps_list is None else eps_list)
    directions = direction_grid(measure.dim, dir_grid)
    moments = measure.projected_moments(r, eps, directions, varrho)
    values = moments.min(axis=0) / np.log(1.0 / eps)
    return IndexProfile(power=int(r), aperture=float(varrho), eps=eps, values=values,
                        direction_count=len(directions), source=measure)


def lower_index_profile(measure: LevyMeasure, eps_list=None, dir_grid: Optional[int] = None) -> IndexProfile:
    """theta(eps): second power, whole space, supremum over the direction lattice"""
    eps = _validate_eps(default_eps_grid(measure) if eps_list is None else eps_list)
    directions = direction_grid(measure.dim, dir_grid)
    moments = measure.projected_moments(2, eps, directions, 0.0)
    values = moments.max(axis=0) / np.log(1.0 / eps)
    return IndexProfile(power='lower', aperture=None, eps=eps, values=values,
                        direction_count=len(directions), source=measure)


def small_jump_variance_profile(measure: LevyMeasure, eps_list=None) -> IndexProfile:
    """
    [eps^2 ln(1/eps)]^-1 times the second moment of the jumps below eps.

    Divergence of this profile is the classical sufficient condition for a
    smooth law of the Levy process itself; comparing it with the order
    index exposes measures whose index is infinite while this stays bounded.
    """
    eps = _validate_eps(default_eps_grid(measure) if eps_list is None else eps_list)
    inner = measure.norm_moments(2, eps) - np.array([measure.retained_mass(e) for e in eps])
    values = np.maximum(inner, 0.0) / np.log(1.0 / eps)
    return IndexProfile(power='variance', aperture=None, eps=eps, values=values,
                        direction_count=0, source=measure)


def _classify_values(eps: np.ndarray, values: np.ndarray) -> IndexClass:
    if eps.size < 5:
        raise InsufficientProfile(f"need at least 5 profile points, got {eps.size}")
    if np.log10(eps[0] / eps[-1]) < 3.0:
        raise InsufficientProfile("profile must span at least 3 decades of eps")

    n_tail = max(3, int(np.ceil(TAIL_FRACTION * eps.size)))
    tail_eps, tail_vals = eps[-n_tail:], values[-n_tail:]

    if np.all(tail_vals == 0):
        return IndexClass(IndexKind.ZERO, 0.0, 0.0, slope=float('-inf'))
    if np.any(np.isinf(tail_vals)):
        return IndexClass(IndexKind.INFINITE, slope=float('inf'))

    positive = tail_vals > 0
    x = np.log(np.log(1.0 / tail_eps[positive]))
    y = np.log(tail_vals[positive])
    if positive.sum() < 3:
        return IndexClass(IndexKind.ZERO, 0.0, 0.0, slope=float('-inf'))
    slope = float(np.polyfit(x, y, 1)[0])

    if slope > SLOPE_TOLERANCE:
        return IndexClass(IndexKind.INFINITE, slope=slope)
    if slope < -SLOPE_TOLERANCE:
        return IndexClass(IndexKind.ZERO, 0.0, 0.0, slope=slope)
    return IndexClass(IndexKind.FINITE, float(np.mean(tail_vals)), float(np.std(tail_vals)), slope=slope)


def classify_index(profile: IndexProfile, varrho_list: Optional[Sequence[float]] = None) -> IndexClass:
    """
    Extrapolate the eps-limit from the tail of the profile.

    The slope of ln(value) against ln ln(1/eps) over the last 40% of the
    points decides: near zero is Finite(tail mean +- tail std), clearly
    positive is Infinite, clearly negative is Zero. With varrho_list the
    profile is recomputed at each aperture and the verdict must agree.
    """
    base = _classify_values(profile.eps, profile.values)
    if not varrho_list or not isinstance(profile.power, int) or profile.source is None:
        return base

    per_aperture = {}
    verdicts = []
    for varrho in sorted(varrho_list, reverse=True):
        p = order_index_profile(profile.source, profile.power, varrho, profile.eps, profile.direction_count)
        verdict = _classify_values(p.eps, p.values)
        per_aperture[float(varrho)] = verdict.kind.value
        verdicts.append(verdict)

    kinds = {v.kind for v in verdicts}
    stable = len(kinds) == 1
    if stable and base.kind == IndexKind.FINITE:
        values = np.array([v.value for v in verdicts])
        spread = values.max() - values.min()
        allowance = 3.0 * max(v.uncertainty for v in verdicts) + 1e-12
        stable = bool(spread <= allowance)

    # the aperture limit is the smallest aperture evaluated
    final = verdicts[-1] if stable else base
    final.stable = stable
    final.per_aperture = per_aperture
    if not stable:
        logger.warning("Index verdict not stable across apertures: %s", per_aperture)
    return final


def estimate_order_index(measure: LevyMeasure, r: int, eps_list=None,
                         apertures: Sequence[float] = DEFAULT_APERTURES) -> IndexClass:
    """Order index of power r with the aperture limit approximated by a ladder"""
    profile = order_index_profile(measure, r, max(apertures), eps_list)
    return classify_index(profile, apertures)


@dataclass
class WideConeReport:
    """Per-direction cone masses at shrinking floors"""
    aperture: float
    floors: np.ndarray
    directions: np.ndarray
    masses: np.ndarray
    diverges: np.ndarray
    holds: bool
    witness: Optional[List[float]]

    def to_dict(self) -> Dict[str, Any]:
        failing = np.flatnonzero(~self.diverges)
        return {
            'aperture': self.aperture,
            'floors': self.floors.tolist(),
            'direction_count': int(len(self.directions)),
            'diverging_directions': int(self.diverges.sum()),
            'holds': self.holds,
            'witness': self.witness,
            'witness_masses': self.masses[failing[0]].tolist() if failing.size else None,
        }


def wide_cone_check(measure: LevyMeasure, varrho: float = 0.5, dir_grid: Optional[int] = None,
                    mass_threshold: float = 0.5, floors: Sequence[float] = WIDE_CONE_FLOORS) -> WideConeReport:
    """
    Numerical proxy for Pi(V(v, aperture)) = inf in every direction.

    A direction counts as divergent when, at every step down the floor
    ladder, its cone mass at least doubles or grows by mass_threshold.
    """
    validate_aperture(varrho)
    floors = np.asarray(floors, dtype=float)
    directions = direction_grid(measure.dim, dir_grid)
    masses = measure.cone_masses(directions, varrho, floors)

    with np.errstate(divide='ignore', invalid='ignore'):
        prev, nxt = masses[:, :-1], masses[:, 1:]
        ratio_ok = (prev > 0) & (nxt >= 2.0 * prev)
        increment_ok = (nxt - prev) >= mass_threshold
    diverges = np.all(ratio_ok | increment_ok, axis=1) & (masses[:, -1] > 0)

    holds = bool(np.all(diverges))
    witness = None if holds else directions[np.flatnonzero(~diverges)[0]].tolist()
    if witness is not None:
        logger.info("Wide cone condition fails along %s", witness)
    return WideConeReport(varrho, floors, directions, masses, diverges, holds, witness)


@dataclass
class MomentReport:
    """Flags for the small-jump first moment and big-jump p-moments"""
    first_moment_small_jumps: bool
    first_moment_value: float
    big_jump_pmoments: Dict[float, bool]
    big_jump_values: Dict[float, float]

    def to_dict(self) -> Dict[str, Any]:
        return {
            'first_moment_small_jumps': self.first_moment_small_jumps,
            'first_moment_value': self.first_moment_value,
            'big_jump_pmoments': {str(p): ok for p, ok in self.big_jump_pmoments.items()},
            'big_jump_values': {str(p): v for p, v in self.big_jump_values.items()},
        }


def moment_checks(measure: LevyMeasure, p_list: Sequence[float] = (1.0, 2.0)) -> MomentReport:
    """Finite first moment of jumps |u| <= 1 and finite p-moments of jumps |u| > 1"""
    first = measure.norm_power_moment(1.0, 0.0, np.nextafter(1.0, 2.0))
    big_values = {float(p): measure.norm_power_moment(float(p), np.nextafter(1.0, 2.0), np.inf) for p in p_list}
    return MomentReport(
        first_moment_small_jumps=bool(np.isfinite(first)),
        first_moment_value=float(first),
        big_jump_pmoments={p: bool(np.isfinite(v)) for p, v in big_values.items()},
        big_jump_values=big_values,
    )
