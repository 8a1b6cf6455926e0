#!/usr/bin/env python3
"""
Differential Grids
==================

A differential grid is a family of cells (time interval x mark set), each
with its own time stretch, that are pairwise disjoint. The construction
here cuts the marks into annuli I_n = {eps_{n+1} <= |u| < eps_n} with

    eps_n = 1 / (n + 1)        for n >= 0
    eps_n = (|n| + 2) / 2      for n < 0

and splits annulus I_n into K_n sub-cells through the auxiliary uniform
coordinate every simulated event carries. K_n follows

    K_n = floor(max(B, 2 t Pi(I_n), (3 / gamma) 2^(|n|-2) t^2 Pi(I_n))) + 2

enlarged to floor((3 / (2 gamma)) 2^|n| t^2 Pi(I_n)^2) + 1 whenever the
result misses t^2 Pi(I_n)^2 / K_n < (2 gamma / 3) 2^-|n|.
All cells share the time interval [0, t) and the bump stretch whose
running integral equals 1 on (beta, t - beta); cell i uses (eps_n^-1 ^ 1) h.
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, Iterator, List, Optional, Tuple

import numpy as np

from ..errors import ExperimentFailure, InvalidParams
from ..measures.levy_measure import LevyMeasure
from ..simulation.point_measure import PointConfiguration
from .stretch import TimeStretch, bump_stretch, time_stretch_map

logger = logging.getLogger(__name__)

DEFAULT_EPS_FLOOR = 1.0 / 32.0
DEFAULT_MAX_RADIUS = 100.0
AUX_RESOLUTION = 2 ** 52


def annulus_radius(n) -> np.ndarray:
    """eps_n"""
    n = np.asarray(n)
    return np.where(n >= 0, 1.0 / (np.abs(n) + 1.0), (np.abs(n) + 2.0) / 2.0)


def annulus_index(norms: np.ndarray) -> np.ndarray:
    """n with eps_{n+1} <= |u| < eps_n"""
    norms = np.asarray(norms, dtype=float)
    small = np.ceil(1.0 / np.where(norms > 0, norms, 1.0)) - 2.0
    large = -(np.floor(2.0 * norms) - 1.0)
    return np.where(norms < 1.0, small, large).astype(np.int64)


@dataclass
class AnnulusRecord:
    n: int
    lo: float
    hi: float
    mass: float
    k_formula: int
    k: int
    enlarged: bool

    def to_dict(self) -> Dict[str, Any]:
        return {'n': self.n, 'eps_lo': self.lo, 'eps_hi': self.hi, 'mass': self.mass,
                'K_formula': self.k_formula, 'K': self.k, 'enlarged': self.enlarged}


@dataclass
class GridCell:
    """[a, b) x {u in annulus n, aux in [j/K, (j+1)/K)} with stretch level * h"""
    index: int
    interval: Tuple[float, float]
    annulus: int
    sub_cell: int
    sub_cells: int
    level: float

    def contains(self, times: np.ndarray, marks: np.ndarray, aux: np.ndarray) -> np.ndarray:
        n = annulus_index(np.linalg.norm(np.atleast_2d(marks), axis=1))
        slot = np.minimum((np.asarray(aux) * self.sub_cells).astype(np.int64), self.sub_cells - 1)
        a, b = self.interval
        times = np.asarray(times)
        return (n == self.annulus) & (slot == self.sub_cell) & (times >= a) & (times < b)


@dataclass
class DifferentialGrid:
    """
    Cells built annulus by annulus with their construction metadata.

    Sub-cells are numbered consecutively, annulus after annulus; cells are
    materialized on demand since K_n grows like 2^|n|.
    """
    horizon: float
    B: float
    gamma: float
    beta: float
    shape: TimeStretch
    annuli: List[AnnulusRecord]
    empty_k: int
    eps_floor: float
    metadata: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        sizes = np.array([r.k for r in self.annuli], dtype=np.int64)
        self._starts = np.concatenate([[0], np.cumsum(sizes)]).astype(np.int64)
        self._annulus_ids = np.array([r.n for r in self.annuli], dtype=np.int64)
        self._annulus_levels = np.minimum(1.0 / annulus_radius(self._annulus_ids), 1.0) \
            if self.annuli else np.zeros(0)

    @property
    def n_cells(self) -> int:
        return int(self._starts[-1])

    def cell(self, index: int) -> GridCell:
        if not 0 <= index < self.n_cells:
            raise IndexError(f"cell {index} outside a grid of {self.n_cells} cells")
        slot = int(np.searchsorted(self._starts, index, side='right')) - 1
        record = self.annuli[slot]
        return GridCell(int(index), (0.0, self.horizon), record.n, int(index - self._starts[slot]), record.k,
                        float(self._annulus_levels[slot]))

    def iter_cells(self) -> Iterator[GridCell]:
        for index in range(self.n_cells):
            yield self.cell(index)

    def locate(self, times: np.ndarray, marks: np.ndarray, aux: np.ndarray) -> np.ndarray:
        """Cell index of every event, -1 outside the grid"""
        times = np.asarray(times, dtype=float)
        out = np.full(times.size, -1, dtype=np.int64)
        if times.size == 0 or not self.annuli:
            return out
        n = annulus_index(np.linalg.norm(np.atleast_2d(marks), axis=1))
        in_time = (times >= 0.0) & (times < self.horizon)
        aux = np.asarray(aux, dtype=float)
        for slot, record in enumerate(self.annuli):
            hit = in_time & (n == record.n)
            if np.any(hit):
                out[hit] = self._starts[slot] + np.minimum((aux[hit] * record.k).astype(np.int64), record.k - 1)
        return out

    def levels(self, cells: np.ndarray) -> np.ndarray:
        """eps_n^-1 ^ 1 for the annulus of every cell"""
        slots = np.searchsorted(self._starts, np.asarray(cells, dtype=np.int64), side='right') - 1
        return self._annulus_levels[slots]

    def jh(self, cells: np.ndarray, times: np.ndarray) -> np.ndarray:
        """J of the cell stretch at the given times"""
        return self.levels(cells) * self.shape.J(times)

    def stretch_for(self, cell: int) -> TimeStretch:
        return self.shape.scaled(float(self.levels([cell])[0]))

    def refined(self, factor: int = 2) -> "DifferentialGrid":
        """Every sub-cell split into `factor` pieces"""
        if factor < 1:
            raise InvalidParams("refinement factor must be a positive integer")
        annuli = [AnnulusRecord(r.n, r.lo, r.hi, r.mass, r.k_formula, r.k * factor, r.enlarged)
                  for r in self.annuli]
        _check_resolution(annuli)
        return DifferentialGrid(self.horizon, self.B, self.gamma, self.beta, self.shape, annuli,
                                self.empty_k, self.eps_floor, dict(self.metadata, refined=factor))

    def cells_disjoint(self, max_pairs: int = 4096) -> bool:
        """
        Disjointness of the cells as subsets of time x marks x aux.

        Small grids are checked pair by pair on their materialized cells;
        larger ones through the annulus partition (distinct annulus indices,
        sub-cells [j/K, (j+1)/K) of each annulus).
        """
        ids = [r.n for r in self.annuli]
        if len(set(ids)) != len(ids):
            return False
        if self.n_cells > max_pairs:
            return all(r.k >= 1 for r in self.annuli)
        cells = list(self.iter_cells())
        if len(cells) < 2:
            return True
        keys = np.array([(c.annulus, c.sub_cell / c.sub_cells, (c.sub_cell + 1) / c.sub_cells,
                          c.interval[0], c.interval[1]) for c in cells])
        for i in range(len(keys)):
            same_annulus = keys[i + 1:, 0] == keys[i, 0]
            aux_overlap = (keys[i + 1:, 1] < keys[i, 2]) & (keys[i, 1] < keys[i + 1:, 2])
            time_overlap = (keys[i + 1:, 3] < keys[i, 4]) & (keys[i, 3] < keys[i + 1:, 4])
            if np.any(same_annulus & aux_overlap & time_overlap):
                return False
        return True

    def stretches_compatible(self) -> bool:
        return self.shape.grid_compatible((0.0, self.horizon))

    def property_checks(self) -> Dict[str, Any]:
        t = self.horizon
        k = np.array([r.k for r in self.annuli], dtype=float)
        mass = np.array([r.mass for r in self.annuli])
        n = np.array([r.n for r in self.annuli])
        bound = (2.0 * self.gamma / 3.0) * 2.0 ** (-np.abs(n))
        summed = float(np.sum(t ** 2 * mass ** 2 / (2.0 * k))) if k.size else 0.0
        return {
            'k_exceeds_B': bool(np.all(k > self.B)) and self.empty_k > self.B,
            'rate_below_half': bool(np.all(t * mass / k < 0.5)) if k.size else True,
            'square_bound': bool(np.all(t ** 2 * mass ** 2 / k < bound)) if k.size else True,
            'summed_bound': summed,
            'summed_below_gamma': summed < self.gamma,
        }

    def transform(self, config: PointConfiguration, lengths, step: Optional[float] = None) -> PointConfiguration:
        """Simultaneous move of each cell's events by T_{-l_i h_i}; lengths map cell -> l_i or one l for all"""
        if config.n_events == 0:
            return config
        cells = self.locate(config.times, config.marks, config.aux)
        moving = cells >= 0
        if not np.any(moving):
            return config
        if isinstance(lengths, dict):
            per_event = np.array([float(lengths.get(int(c), 0.0)) for c in cells[moving]])
        else:
            per_event = np.full(int(moving.sum()), float(lengths))
        scales = np.zeros(config.n_events)
        scales[moving] = per_event * self.levels(cells[moving])
        active = scales != 0
        if not np.any(active):
            return config
        times = np.array(config.times, copy=True)
        times[active] = time_stretch_map(self.shape, -scales[active], times[active], step)
        return config.with_times(times)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'horizon': self.horizon,
            'B': self.B,
            'gamma': self.gamma,
            'beta': self.beta,
            'eps_floor': self.eps_floor,
            'n_cells': self.n_cells,
            'empty_annulus_K': self.empty_k,
            'annuli': [r.to_dict() for r in self.annuli],
            'checks': self.property_checks(),
            'time_axis': 'half-line',
            **self.metadata,
        }


def _check_resolution(records: List[AnnulusRecord]) -> None:
    """The auxiliary uniform resolves at most 2^52 sub-cells"""
    total = sum(r.k for r in records)
    if total > AUX_RESOLUTION:
        raise InvalidParams(f"the grid needs {total:.3g} sub-cells, beyond the resolution of the auxiliary coordinate; "
                            "raise eps_floor")


def k_formula(mass: float, n: int, t: float, B: float, gamma: float) -> int:
    return int(np.floor(max(B, 2.0 * t * mass, (3.0 / gamma) * 2.0 ** (abs(n) - 2) * t ** 2 * mass))) + 2


def k_enlarged(mass: float, n: int, t: float, gamma: float) -> int:
    return int(np.floor((3.0 / (2.0 * gamma)) * 2.0 ** abs(n) * t ** 2 * mass ** 2)) + 1


def _annulus_masses(measure: LevyMeasure, eps_floor: float, max_radius: float) -> List[Tuple[int, float]]:
    """(n, Pi(I_n)) for every annulus above eps_floor with positive mass"""
    n_top = int(annulus_index(np.array([eps_floor]))[0])
    points, masses = None, None
    if hasattr(measure, 'locations'):
        points, masses = measure.discretize(eps_floor)
    out = []
    if points is not None:
        if len(masses) == 0:
            return out
        idx = annulus_index(np.linalg.norm(points, axis=1))
        for n in np.unique(idx):
            if n <= n_top:
                out.append((int(n), float(masses[idx == n].sum())))
        return out

    # radial or mixed measures: every annulus from the largest jump size, capped at max_radius, down to the floor
    n_low = -1
    n_cap = -int(np.ceil(2.0 * max_radius))
    while measure.mass_between(float(annulus_radius(n_low)), np.inf) > 0 and n_low > n_cap:
        n_low -= 1
    for n in range(n_low, n_top + 1):
        mass = measure.mass_between(float(annulus_radius(n + 1)), float(annulus_radius(n)))
        if mass > 0:
            out.append((n, float(mass)))
    return out


def build_grid(measure: LevyMeasure, t: float, B: float = 4.0, gamma: float = 0.25,
               shape_beta: float = 0.1, eps_floor: float = DEFAULT_EPS_FLOOR,
               max_radius: float = DEFAULT_MAX_RADIUS) -> DifferentialGrid:
    """Grid on [0, t) over the annuli of the measure with eps_floor <= |u| < max_radius (atoms: any size)"""
    if t <= 0:
        raise InvalidParams("the horizon must be positive")
    if B <= 0:
        raise InvalidParams("B must be positive")
    if not 0.0 < gamma < 0.5:
        raise InvalidParams(f"gamma must lie in (0, 1/2), got {gamma}")
    if not 0.0 < shape_beta < 0.5:
        raise InvalidParams(f"shape_beta must lie in (0, 1/2), got {shape_beta}")
    if not 0.0 < eps_floor <= 1.0:
        raise InvalidParams("eps_floor must lie in (0, 1]")

    records = []
    for n, mass in _annulus_masses(measure, eps_floor, max_radius):
        displayed = k_formula(mass, n, t, B, gamma)
        k = displayed
        bound = (2.0 * gamma / 3.0) * 2.0 ** (-abs(n))
        enlarged = not (t ** 2 * mass ** 2 / k < bound)
        if enlarged:
            k = max(k, k_enlarged(mass, n, t, gamma))
        records.append(AnnulusRecord(n, float(annulus_radius(n + 1)), float(annulus_radius(n)), mass,
                                     displayed, k, enlarged))

    _check_resolution(records)
    beta = shape_beta * t
    grid = DifferentialGrid(t, float(B), float(gamma), beta, bump_stretch(0.0, t, beta), records,
                            k_formula(0.0, 0, t, B, gamma), float(eps_floor),
                            metadata={'measure': measure.label})

    checks = grid.property_checks()
    failed = [name for name, ok in checks.items() if isinstance(ok, bool) and not ok]
    if failed:
        raise ExperimentFailure("grid-properties", ", ".join(failed))
    logger.debug("Built grid with %d annuli and %d cells", len(records), grid.n_cells)
    return grid


def grid_transform(config: PointConfiguration, grid: DifferentialGrid, lengths,
                   step: Optional[float] = None) -> PointConfiguration:
    """The commuting group of the grid applied with lengths l_i"""
    return grid.transform(config, lengths, step)
