#!/usr/bin/env python3
"""
Poisson Point Measure Simulation
================================

Realizations of the Poisson point measure with intensity dt x Pi(du),
truncated to jumps with |u| >= eps_cut, and the Levy path built from them:

    U_t = sum_{tau <= t} u_tau - (t - t0) M^eps   [+ Gaussian substitute]

Each event also carries an auxiliary uniform coordinate used to split
mark sets into sub-cells when differential grids are built.
"""

import logging
import struct
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any, Dict, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import stats

from config.settings import Config
from ..errors import InvalidParams, RateOverflow
from ..measures.levy_measure import LevyMeasure
from .marks import get_sampler
from .rng import (PURPOSE_AUXILIARY, PURPOSE_EVENTS, PURPOSE_GAUSSIAN, PURPOSE_MARKS, block_stream,
                  replica_blocks, replica_stream)

logger = logging.getLogger(__name__)

NORM_SLACK = 1e-12
DUMP_MAGIC = b'LVPC'
DUMP_VERSION = 1
# magic, version, dim, replica, count, t0, t1, eps_cut, seed
DUMP_HEADER = struct.Struct('<4sIIQQdddQ')


class SmallJumpMode(Enum):
    """Treatment of the jumps below the cutoff"""
    DROP = "drop"
    GAUSSIAN_MATCH = "gaussian_match"  # moment-matched Brownian substitute, a bias-study device


def _freeze(array: np.ndarray) -> np.ndarray:
    array = np.ascontiguousarray(array)
    array.setflags(write=False)
    return array


@dataclass(frozen=True)
class PointConfiguration:
    """Time-sorted events (tau, u) of one realization inside [t0, t1)"""
    window: Tuple[float, float]
    times: np.ndarray
    marks: np.ndarray
    eps_cut: float
    rng_seed: int
    replica: int = 0
    aux: Optional[np.ndarray] = None

    def __post_init__(self):
        t0, t1 = (float(w) for w in self.window)
        if not t1 > t0:
            raise InvalidParams(f"window must satisfy t0 < t1, got {self.window}")
        times = np.asarray(self.times, dtype=float).reshape(-1)
        marks = np.asarray(self.marks, dtype=float)
        if marks.ndim == 1:
            marks = marks.reshape(times.size, -1) if times.size else marks.reshape(0, max(marks.size, 1))
        if marks.shape[0] != times.size:
            raise InvalidParams("one mark per event time is required")
        if times.size:
            if np.any(np.diff(times) <= 0):
                raise InvalidParams("event times must be strictly increasing")
            if times[0] < t0 or times[-1] >= t1:
                raise InvalidParams("event times must lie inside the window")
            if np.any(np.linalg.norm(marks, axis=1) < self.eps_cut * (1.0 - NORM_SLACK)):
                raise InvalidParams("every retained mark must satisfy |u| >= eps_cut")
        aux = self.aux
        if aux is None:
            aux = np.full(times.size, 0.5)
        aux = np.asarray(aux, dtype=float).reshape(-1)
        if aux.size != times.size:
            raise InvalidParams("one auxiliary coordinate per event is required")

        object.__setattr__(self, 'window', (t0, t1))
        object.__setattr__(self, 'times', _freeze(times))
        object.__setattr__(self, 'marks', _freeze(marks))
        object.__setattr__(self, 'aux', _freeze(aux))

    @property
    def dim(self) -> int:
        return self.marks.shape[1]

    @property
    def n_events(self) -> int:
        return int(self.times.size)

    @property
    def norms(self) -> np.ndarray:
        return np.linalg.norm(self.marks, axis=1)

    def with_times(self, new_times: np.ndarray) -> "PointConfiguration":
        """Same marks at moved times, re-sorted; window stretched to cover the new times"""
        new_times = np.asarray(new_times, dtype=float)
        order = np.argsort(new_times, kind='stable')
        t0, t1 = self.window
        if new_times.size:
            t0 = min(t0, float(new_times.min()))
            t1 = max(t1, float(np.nextafter(new_times.max(), np.inf)))
        return PointConfiguration((t0, t1), new_times[order], self.marks[order], self.eps_cut,
                                  self.rng_seed, self.replica, self.aux[order])

    def count_in(self, t_lo: float, t_hi: float, mark_predicate=None) -> int:
        """Number of events with t_lo <= tau < t_hi and mark in the predicate set"""
        inside = (self.times >= t_lo) & (self.times < t_hi)
        if mark_predicate is not None:
            inside &= mark_predicate(self.marks)
        return int(inside.sum())

    def to_dict(self) -> Dict[str, Any]:
        return {
            'window': list(self.window),
            'n_events': self.n_events,
            'eps_cut': self.eps_cut,
            'rng_seed': self.rng_seed,
            'replica': self.replica,
        }


@dataclass(frozen=True)
class CutoffScheme:
    """Cutoff eps, the small-jump treatment and the compensator M^eps"""
    eps_cut: float
    compensator: np.ndarray
    mode: SmallJumpMode = SmallJumpMode.DROP
    covariance: Optional[np.ndarray] = None

    def __post_init__(self):
        if not 0.0 < self.eps_cut <= 1.0:
            raise InvalidParams(f"eps_cut must lie in (0, 1], got {self.eps_cut}")
        object.__setattr__(self, 'compensator', _freeze(np.atleast_1d(np.asarray(self.compensator, dtype=float))))
        if self.mode is SmallJumpMode.GAUSSIAN_MATCH:
            if self.covariance is None:
                raise InvalidParams("the Gaussian substitute needs the small-jump covariance")
            object.__setattr__(self, 'covariance', _freeze(np.atleast_2d(np.asarray(self.covariance, dtype=float))))

    @property
    def dim(self) -> int:
        return self.compensator.size

    def gaussian_factor(self) -> np.ndarray:
        """Square root of the small-jump covariance (zero matrix under DROP)"""
        if self.mode is not SmallJumpMode.GAUSSIAN_MATCH:
            return np.zeros((self.dim, self.dim))
        values, vectors = np.linalg.eigh(self.covariance)
        return vectors * np.sqrt(np.clip(values, 0.0, None))[None, :]

    def to_dict(self) -> Dict[str, Any]:
        return {
            'eps_cut': self.eps_cut,
            'mode': self.mode.value,
            'compensator': self.compensator.tolist(),
            'covariance': None if self.covariance is None else self.covariance.tolist(),
        }


def cell_mask(cell, times: np.ndarray, marks: np.ndarray, aux: np.ndarray) -> np.ndarray:
    """Events belonging to a mark set: None (all), a grid cell with contains(), or a predicate on marks"""
    if cell is None:
        return np.ones(len(times), dtype=bool)
    if hasattr(cell, "contains"):
        return np.asarray(cell.contains(times, marks, aux), dtype=bool)
    return np.asarray(cell(marks), dtype=bool).reshape(len(times))


def compensator_drift(measure: LevyMeasure, eps_cut: float) -> np.ndarray:
    """M^eps with components int u^i over {eps <= |u^i|, |u| <= 1}"""
    if not 0.0 < eps_cut <= 1.0:
        raise InvalidParams(f"eps_cut must lie in (0, 1], got {eps_cut}")
    return np.asarray(measure.compensator(eps_cut, componentwise=True), dtype=float)


def make_scheme(measure: LevyMeasure, eps_cut: float,
                mode: Union[SmallJumpMode, str] = SmallJumpMode.DROP,
                compensate: bool = True) -> CutoffScheme:
    """Scheme for the measure; compensate=False keeps raw compound Poisson noise (M = 0)"""
    mode = SmallJumpMode(mode)
    covariance = None
    if mode is SmallJumpMode.GAUSSIAN_MATCH:
        covariance = measure.small_jump_covariance(eps_cut)
    compensator = compensator_drift(measure, eps_cut) if compensate else np.zeros(measure.dim)
    return CutoffScheme(eps_cut, compensator, mode, covariance)


def default_eps_cut(measure: LevyMeasure, max_rate: Optional[float] = None) -> float:
    """Smallest cutoff in (0, 1] whose retained mass per unit time stays below max_rate"""
    max_rate = float(max_rate or Config.MAX_RATE_PER_UNIT_TIME)
    min_norm = getattr(measure, 'min_norm', None)
    if min_norm is not None and np.isfinite(measure.total_mass()):
        smallest = min_norm()
        if measure.total_mass() <= max_rate:
            return float(min(1.0, smallest)) if np.isfinite(smallest) else 1.0
    if measure.retained_mass(1.0) > max_rate:
        logger.warning("Mass beyond |u| = 1 already exceeds %g per unit time", max_rate)
        return 1.0
    lo, hi = -300.0, 0.0  # log10 bounds
    if measure.retained_mass(10.0 ** lo) <= max_rate:
        return 10.0 ** lo
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if measure.retained_mass(10.0 ** mid) <= max_rate:
            hi = mid
        else:
            lo = mid
    return float(10.0 ** hi)


def _event_rate(measure: LevyMeasure, window: Tuple[float, float], eps_cut: float,
                event_budget: Optional[float]) -> float:
    budget = float(event_budget or Config.EVENT_BUDGET)
    lam = measure.retained_mass(eps_cut) * (window[1] - window[0])
    if not np.isfinite(lam) or lam > budget:
        raise RateOverflow(lam, budget)
    return lam


def _distinct_times(rng: np.random.Generator, t0: float, t1: float, n: int) -> np.ndarray:
    times = np.sort(rng.uniform(t0, t1, n))
    while times.size > 1 and np.any(np.diff(times) <= 0):
        # a tie has probability zero; redraw rather than ordering by convention
        times = np.sort(rng.uniform(t0, t1, n))
    return times


def sample_configuration(measure: LevyMeasure, window: Sequence[float], eps_cut: float,
                         rng_seed: int, replica: int = 0,
                         event_budget: Optional[float] = None) -> PointConfiguration:
    """One realization of the events with |u| >= eps_cut inside the window"""
    t0, t1 = float(window[0]), float(window[1])
    lam = _event_rate(measure, (t0, t1), eps_cut, event_budget)

    events = replica_stream(rng_seed, replica, PURPOSE_EVENTS)
    n = int(events.poisson(lam)) if lam > 0 else 0
    times = _distinct_times(events, t0, t1, n)
    marks = get_sampler(measure, eps_cut).sample(n, replica_stream(rng_seed, replica, PURPOSE_MARKS))
    if n == 0:
        marks = np.zeros((0, measure.dim))
    aux = replica_stream(rng_seed, replica, PURPOSE_AUXILIARY).random(n)
    return PointConfiguration((t0, t1), times, marks, eps_cut, int(rng_seed), int(replica), aux)


@dataclass
class ConfigurationBatch:
    """Many replicas in compressed-row form: events of replica i sit in offsets[i]:offsets[i+1]"""
    window: Tuple[float, float]
    eps_cut: float
    seed: int
    offsets: np.ndarray
    times: np.ndarray
    marks: np.ndarray
    aux: np.ndarray
    metadata: Dict[str, Any] = field(default_factory=dict)

    @property
    def n_replicas(self) -> int:
        return self.offsets.size - 1

    @property
    def counts(self) -> np.ndarray:
        return np.diff(self.offsets)

    @property
    def replica_index(self) -> np.ndarray:
        return np.repeat(np.arange(self.n_replicas), self.counts)

    def configuration(self, i: int) -> PointConfiguration:
        lo, hi = self.offsets[i], self.offsets[i + 1]
        return PointConfiguration(self.window, self.times[lo:hi], self.marks[lo:hi], self.eps_cut,
                                  self.seed, i, self.aux[lo:hi])

    def jump_sums(self, t: Optional[float] = None) -> np.ndarray:
        """Per-replica sum of marks with tau <= t (all marks when t is None)"""
        weights = self.marks if t is None else self.marks * (self.times <= t)[:, None]
        out = np.zeros((self.n_replicas, self.marks.shape[1]))
        np.add.at(out, self.replica_index, weights)
        return out


def sample_batch(measure: LevyMeasure, window: Sequence[float], eps_cut: float, n_replicas: int,
                 seed: int, event_budget: Optional[float] = None,
                 block_size: Optional[int] = None) -> ConfigurationBatch:
    """Replicas generated block by block from streams keyed by (seed, block)"""
    t0, t1 = float(window[0]), float(window[1])
    lam = _event_rate(measure, (t0, t1), eps_cut, event_budget)
    sampler = get_sampler(measure, eps_cut)

    counts, times, marks, aux = [], [], [], []
    for block, start, stop in replica_blocks(n_replicas, block_size):
        events = block_stream(seed, block, PURPOSE_EVENTS)
        block_counts = events.poisson(lam, size=stop - start) if lam > 0 else np.zeros(stop - start, dtype=np.int64)
        total = int(block_counts.sum())
        owner = np.repeat(np.arange(stop - start), block_counts)
        block_times = events.uniform(t0, t1, total)
        order = np.lexsort((block_times, owner))
        counts.append(block_counts)
        times.append(block_times[order])
        marks.append(sampler.sample(total, block_stream(seed, block, PURPOSE_MARKS)).reshape(total, measure.dim))
        aux.append(block_stream(seed, block, PURPOSE_AUXILIARY).random(total))

    counts = np.concatenate(counts) if counts else np.zeros(0, dtype=np.int64)
    offsets = np.concatenate([[0], np.cumsum(counts)]).astype(np.int64)
    batch = ConfigurationBatch((t0, t1), float(eps_cut), int(seed), offsets,
                               np.concatenate(times) if times else np.zeros(0),
                               np.vstack(marks) if marks else np.zeros((0, measure.dim)),
                               np.concatenate(aux) if aux else np.zeros(0),
                               metadata={'rate': lam, 'measure': measure.label})
    logger.debug("Sampled %d replicas with %d events (rate %.4g)", n_replicas, int(offsets[-1]), lam)
    return batch


def evaluate_levy_path(config: PointConfiguration, scheme: CutoffScheme, times) -> np.ndarray:
    """U at the requested times, shape (len(times), dim); jumps count at their own time"""
    times = np.atleast_1d(np.asarray(times, dtype=float))
    if np.any(np.diff(times) < 0):
        raise InvalidParams("evaluation times must be sorted")
    t0 = config.window[0]
    cumulative = np.vstack([np.zeros((1, config.dim)), np.cumsum(config.marks, axis=0)])
    jumps = cumulative[np.searchsorted(config.times, times, side='right')]
    values = jumps - (times - t0)[:, None] * scheme.compensator[None, :]

    if scheme.mode is SmallJumpMode.GAUSSIAN_MATCH:
        rng = replica_stream(config.rng_seed, config.replica, PURPOSE_GAUSSIAN)
        steps = np.diff(np.concatenate([[t0], times]))
        increments = rng.standard_normal((times.size, config.dim)) * np.sqrt(np.clip(steps, 0.0, None))[:, None]
        values = values + np.cumsum(increments, axis=0) @ scheme.gaussian_factor().T
    return values


def event_count_chisquare(counts: np.ndarray, lam: float, min_expected: float = 5.0) -> Tuple[float, float]:
    """Chi-square goodness of fit of event counts against Poisson(lam); bins pooled to min_expected"""
    counts = np.asarray(counts, dtype=np.int64)
    n = counts.size
    top = int(max(counts.max(initial=0), stats.poisson.ppf(1 - 1e-9, lam))) + 1
    observed = np.bincount(counts, minlength=top + 1)[:top + 1].astype(float)
    expected = n * stats.poisson.pmf(np.arange(top + 1), lam)
    expected[-1] += n * stats.poisson.sf(top, lam)

    obs_bins, exp_bins = [], []
    acc_o = acc_e = 0.0
    for o, e in zip(observed, expected):
        acc_o += o
        acc_e += e
        if acc_e >= min_expected:
            obs_bins.append(acc_o)
            exp_bins.append(acc_e)
            acc_o = acc_e = 0.0
    if acc_e > 0 or acc_o > 0:
        if obs_bins:
            obs_bins[-1] += acc_o
            exp_bins[-1] += acc_e
        else:
            obs_bins.append(acc_o)
            exp_bins.append(acc_e)
    if len(obs_bins) < 2:
        return 0.0, 1.0
    exp_arr = np.asarray(exp_bins)
    exp_arr *= np.sum(obs_bins) / exp_arr.sum()
    result = stats.chisquare(np.asarray(obs_bins), exp_arr)
    return float(result.statistic), float(result.pvalue)


def dump_configuration(config: PointConfiguration, path: Union[str, Path]):
    """Header then little-endian f64 records (tau, u_1..u_m)"""
    header = DUMP_HEADER.pack(DUMP_MAGIC, DUMP_VERSION, config.dim, config.replica, config.n_events,
                              config.window[0], config.window[1], config.eps_cut, config.rng_seed)
    records = np.column_stack([config.times, config.marks]).astype('<f8')
    with open(path, 'wb') as handle:
        handle.write(header)
        handle.write(records.tobytes())


def load_configuration(path: Union[str, Path]) -> PointConfiguration:
    with open(path, 'rb') as handle:
        raw = handle.read()
    magic, version, dim, replica, count, t0, t1, eps_cut, seed = DUMP_HEADER.unpack_from(raw)
    if magic != DUMP_MAGIC or version != DUMP_VERSION:
        raise InvalidParams(f"{path} is not a configuration dump")
    records = np.frombuffer(raw, dtype='<f8', offset=DUMP_HEADER.size).reshape(count, dim + 1)
    aux = replica_stream(seed, replica, PURPOSE_AUXILIARY).random(count)
    return PointConfiguration((t0, t1), records[:, 0].copy(), records[:, 1:].copy(), eps_cut, seed,
                              replica, aux)
