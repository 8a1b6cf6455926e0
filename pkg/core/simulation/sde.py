#!/usr/bin/env python3
"""
Jump SDE Solver
===============

Solves dX = (a(X) - M^eps) dt + dU with classical RK4 between jumps and
exact jump application at event times, then derives along a solved path:

  - the stochastic exponent E_t (fundamental matrix of the linearized flow)
    and its inverse, integrated jointly with the state,
  - the derivative process Y(t) = E_t sum J(tau) E_tau^-1 Delta(X(tau-), u),
  - the Malliavin matrix of a differential grid (Gram matrix of Y over cells).

Batched endpoint simulation uses the closed form for linear drifts and a
vectorised event-aligned RK4 otherwise.
"""

import dataclasses
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Union

import numpy as np
from scipy.linalg import expm

from config.settings import Config
from ..drift.certificates import dissipativity_check
from ..drift.fields import DriftField, sup_gradient_norm
from ..errors import BlowUp, ExperimentFailure, IllConditioned, InvalidParams
from ..measures.levy_measure import LevyMeasure
from .point_measure import (ConfigurationBatch, CutoffScheme, PointConfiguration, SmallJumpMode,
                            cell_mask, sample_batch)
from .rng import PURPOSE_GAUSSIAN, block_stream, replica_blocks

logger = logging.getLogger(__name__)

NONDEGENERACY_THRESHOLD = 1e-10
BOUND_SLACK = 1e-9


@dataclass(frozen=True)
class PathRecord:
    """A solved path; states are right-continuous, pre_jump holds X(tau-)"""
    times: np.ndarray
    states: np.ndarray
    config: PointConfiguration
    event_slots: np.ndarray
    pre_jump: np.ndarray
    compensator: np.ndarray
    step: float
    method: str = "rk4"
    drift_label: str = "drift"
    exponent: Optional[np.ndarray] = None
    exponent_inverse: Optional[np.ndarray] = None
    metadata: Dict[str, Any] = field(default_factory=dict)

    @property
    def dim(self) -> int:
        return self.states.shape[1]

    @property
    def t_start(self) -> float:
        return float(self.times[0])

    @property
    def t_end(self) -> float:
        return float(self.times[-1])

    @property
    def final_state(self) -> np.ndarray:
        return self.states[-1]

    @property
    def event_times(self) -> np.ndarray:
        return self.times[self.event_slots]

    def slot(self, t: Optional[float] = None) -> int:
        """Grid index of the last grid time <= t"""
        if t is None:
            return len(self.times) - 1
        return int(max(np.searchsorted(self.times, t, side='right') - 1, 0))

    def state_at(self, t: float) -> np.ndarray:
        return self.states[self.slot(t)]

    def jump_flags(self) -> np.ndarray:
        flags = np.zeros(len(self.times), dtype=int)
        flags[self.event_slots] = 1
        return flags

    def export_csv(self, path: Union[str, Path]):
        """Columns t, X1..Xm, jump"""
        header = ",".join(['t'] + [f"X{i + 1}" for i in range(self.dim)] + ['jump'])
        table = np.column_stack([self.times, self.states, self.jump_flags()])
        fmt = ['%.17g'] * (1 + self.dim) + ['%d']
        np.savetxt(path, table, delimiter=',', header=header, comments='', fmt=fmt)


def _rk4_step(f: Callable[[np.ndarray], np.ndarray], x: np.ndarray, dt) -> np.ndarray:
    k1 = f(x)
    k2 = f(x + 0.5 * dt * k1)
    k3 = f(x + 0.5 * dt * k2)
    k4 = f(x + dt * k3)
    return x + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _check_norm(x: np.ndarray, t: float, limit: float):
    norm = float(np.max(np.abs(x))) if x.size else 0.0
    if not np.isfinite(norm) or norm > limit:
        raise BlowUp(t, norm)


def solve_path(a: DriftField, config: PointConfiguration, scheme: CutoffScheme, x0,
               step: Optional[float] = None, t_start: Optional[float] = None,
               t_end: Optional[float] = None) -> PathRecord:
    """RK4 between jumps on steps of `step`, each segment ending exactly at the next event"""
    if scheme.mode is not SmallJumpMode.DROP:
        raise InvalidParams("path solving uses the Drop cutoff scheme")
    step = float(step or Config.RK4_STEP)
    if step <= 0:
        raise InvalidParams("step must be positive")
    x = np.atleast_1d(np.asarray(x0, dtype=float)).copy()
    if x.shape != (a.dim,) or not np.all(np.isfinite(x)):
        raise InvalidParams(f"x0 must be a finite vector of length {a.dim}")

    window_start = config.window[0]
    t_start = window_start if t_start is None else float(t_start)
    t_end = config.window[1] if t_end is None else float(t_end)
    if t_start == window_start:
        selected = (config.times >= t_start) & (config.times <= t_end)
    else:
        selected = (config.times > t_start) & (config.times <= t_end)
    event_index = np.flatnonzero(selected)

    M = scheme.compensator
    limit = Config.BLOWUP_NORM

    def field_fn(state):
        return a(state) - M

    times: List[float] = [t_start]
    states: List[np.ndarray] = [x.copy()]
    slots, pre = [], []
    s = t_start
    stops = [(float(config.times[e]), e) for e in event_index] + [(t_end, None)]
    for stop, event in stops:
        while s < stop:
            dt = stop - s if stop - s <= step * (1.0 + 1e-9) else step
            x = _rk4_step(field_fn, x, dt)
            s = stop if dt == stop - s else s + dt
            times.append(s)
            states.append(x.copy())
            _check_norm(x, s, limit)
        if event is not None:
            pre.append(x.copy())
            x = x + config.marks[event]
            states[-1] = x.copy()
            slots.append(len(times) - 1)
            _check_norm(x, s, limit)

    return PathRecord(
        times=np.asarray(times),
        states=np.vstack(states),
        config=config,
        event_slots=np.asarray(slots, dtype=np.int64),
        pre_jump=np.vstack(pre) if pre else np.zeros((0, a.dim)),
        compensator=M,
        step=step,
        drift_label=a.label,
        metadata={'events': event_index.tolist()},
    )


def stochastic_exponent(path: PathRecord, a: DriftField, tolerance: Optional[float] = None) -> PathRecord:
    """
    E' = grad a(X) E and (E^-1)' = -E^-1 grad a(X), integrated jointly with X
    over the path's grid. Returns a copy of the path carrying both.
    """
    tolerance = float(tolerance or Config.EXPONENT_DEFECT_TOL)
    m = path.dim
    M = path.compensator
    eye = np.eye(m)

    def joint(z):
        x = z[:m]
        E = z[m:m + m * m].reshape(m, m)
        Ei = z[m + m * m:].reshape(m, m)
        G = a.grad(x)
        return np.concatenate([a(x) - M, (G @ E).ravel(), (-Ei @ G).ravel()])

    K = len(path.times)
    E = np.empty((K, m, m))
    Ei = np.empty((K, m, m))
    E[0] = Ei[0] = eye
    current_E, current_Ei = eye.copy(), eye.copy()
    for k in range(K - 1):
        dt = path.times[k + 1] - path.times[k]
        z = np.concatenate([path.states[k], current_E.ravel(), current_Ei.ravel()])
        z = _rk4_step(joint, z, dt)
        current_E = z[m:m + m * m].reshape(m, m)
        current_Ei = z[m + m * m:].reshape(m, m)
        E[k + 1], Ei[k + 1] = current_E, current_Ei

    defect = float(np.max(np.linalg.norm(E @ Ei - eye, axis=(1, 2))))
    if defect > tolerance:
        raise IllConditioned(defect, tolerance)
    metadata = dict(path.metadata, exponent_defect=defect)
    return dataclasses.replace(path, exponent=E, exponent_inverse=Ei, metadata=metadata)


def _ensure_exponent(path: PathRecord, a: DriftField) -> PathRecord:
    return path if path.exponent is not None else stochastic_exponent(path, a)


def _event_vectors(path: PathRecord, a: DriftField, events: np.ndarray) -> np.ndarray:
    """E_tau^-1 Delta(X(tau-), u_tau) for the given positions in path.event_slots"""
    if events.size == 0:
        return np.zeros((0, path.dim))
    pre = path.pre_jump[events]
    marks = path.config.marks[np.asarray(path.metadata['events'])[events]]
    increments = a(pre + marks) - a(pre)
    increments = np.atleast_2d(increments).reshape(events.size, path.dim)
    inverses = path.exponent_inverse[path.event_slots[events]]
    return np.einsum('nij,nj->ni', inverses, increments)


def derivative_process(path: PathRecord, a: DriftField, stretch, cell=None,
                       t: Optional[float] = None) -> np.ndarray:
    """Y(t) for the stretch h and mark set (cell); cell may be a predicate on marks or a grid cell"""
    path = _ensure_exponent(path, a)
    k = path.slot(t)
    config = path.config
    positions = np.asarray(path.metadata['events'], dtype=np.int64)
    if positions.size == 0:
        return np.zeros(path.dim)
    in_cell = cell_mask(cell, config.times, config.marks, config.aux)[positions]
    upto = path.event_slots <= k
    chosen = np.flatnonzero(in_cell & upto)
    if chosen.size == 0:
        return np.zeros(path.dim)
    weights = np.asarray(stretch.J(path.event_times[chosen]), dtype=float)
    vectors = _event_vectors(path, a, chosen)
    return path.exponent[k] @ (weights @ vectors)


@dataclass
class GridDerivative:
    """Per-cell derivatives g_i of X(t) and their Gram matrix"""
    t: float
    cell_ids: np.ndarray
    vectors: np.ndarray
    sigma: np.ndarray
    eigenvalues: np.ndarray
    n_cells: int

    @property
    def lambda_min(self) -> float:
        return float(self.eigenvalues[0]) if self.eigenvalues.size else 0.0

    @property
    def nondegenerate(self) -> bool:
        return self.lambda_min > NONDEGENERACY_THRESHOLD

    def to_dict(self) -> Dict[str, Any]:
        return {
            't': self.t,
            'occupied_cells': int(self.cell_ids.size),
            'n_cells': self.n_cells,
            'sigma': self.sigma.tolist(),
            'eigenvalues': self.eigenvalues.tolist(),
            'lambda_min': self.lambda_min,
            'nondegenerate': self.nondegenerate,
        }


def malliavin_matrix(path: PathRecord, a: DriftField, grid, t: Optional[float] = None) -> GridDerivative:
    """Sigma = sum_i g_i g_i^T over the grid's cells, g_i the derivative of X(t) along cell i"""
    path = _ensure_exponent(path, a)
    k = path.slot(t)
    config = path.config
    m = path.dim
    positions = np.asarray(path.metadata['events'], dtype=np.int64)

    cell_of = np.full(positions.size, -1, dtype=np.int64)
    if positions.size:
        cell_of = np.asarray(grid.locate(config.times, config.marks, config.aux), dtype=np.int64)[positions]
    chosen = np.flatnonzero((cell_of >= 0) & (path.event_slots <= k))

    if chosen.size == 0:
        sigma = np.zeros((m, m))
        return GridDerivative(path.times[k], np.zeros(0, dtype=np.int64), np.zeros((0, m)), sigma,
                              np.zeros(m), grid.n_cells)

    cells = cell_of[chosen]
    weights = np.asarray(grid.jh(cells, path.event_times[chosen]), dtype=float)
    contributions = weights[:, None] * _event_vectors(path, a, chosen)
    cell_ids, inverse = np.unique(cells, return_inverse=True)
    sums = np.zeros((cell_ids.size, m))
    np.add.at(sums, inverse, contributions)
    vectors = sums @ path.exponent[k].T
    sigma = vectors.T @ vectors
    sigma = 0.5 * (sigma + sigma.T)
    eigenvalues = np.linalg.eigvalsh(sigma)
    return GridDerivative(float(path.times[k]), cell_ids, vectors, sigma, eigenvalues, grid.n_cells)


@dataclass
class ExponentBounds:
    """det E_s >= exp(-m s C) and exp(-s C) <= |E_s|, |E_s^-1| <= exp(s C) along the path"""
    gradient_bound: float
    horizon: float
    det_ok: bool
    norm_ok: bool
    inverse_ok: bool
    min_det_margin: float

    @property
    def holds(self) -> bool:
        return self.det_ok and self.norm_ok and self.inverse_ok

    def to_dict(self) -> Dict[str, Any]:
        return dataclasses.asdict(self) | {'holds': self.holds}


def exponent_bounds(path: PathRecord, a: DriftField) -> ExponentBounds:
    path = _ensure_exponent(path, a)
    visited = np.vstack([path.states, path.pre_jump]) if len(path.pre_jump) else path.states
    C = sup_gradient_norm(a, visited)
    elapsed = path.times - path.t_start
    m = path.dim

    dets = np.linalg.det(path.exponent)
    det_floor = np.exp(-m * elapsed * C)
    upper = np.exp(elapsed * C) * (1.0 + BOUND_SLACK)
    lower = np.exp(-elapsed * C) * (1.0 - BOUND_SLACK)
    norms = np.linalg.norm(path.exponent, 2, axis=(1, 2))
    inv_norms = np.linalg.norm(path.exponent_inverse, 2, axis=(1, 2))
    return ExponentBounds(
        gradient_bound=C,
        horizon=float(elapsed[-1]),
        det_ok=bool(np.all(dets >= det_floor * (1.0 - BOUND_SLACK))),
        norm_ok=bool(np.all((norms <= upper) & (norms >= lower))),
        inverse_ok=bool(np.all((inv_norms <= upper) & (inv_norms >= lower))),
        min_det_margin=float(np.min(dets / det_floor)),
    )


def assert_exponent_bounds(path: PathRecord, a: DriftField) -> ExponentBounds:
    bounds = exponent_bounds(path, a)
    if not bounds.holds:
        raise ExperimentFailure("exponent-bounds", str(bounds.to_dict()))
    return bounds


# -- batched endpoints -------------------------------------------------------

def _linear_endpoints(A: np.ndarray, batch: ConfigurationBatch, x0: np.ndarray, t: float,
                      M: np.ndarray) -> np.ndarray:
    n, m = batch.n_replicas, A.shape[0]
    block = np.zeros((2 * m, 2 * m))
    block[:m, :m] = A
    block[:m, m:] = np.eye(m)
    big = expm(block * t)
    flow, integral = big[:m, :m], big[:m, m:]
    out = np.tile(flow @ x0 - integral @ M, (n, 1))

    if batch.times.size:
        lags = t - batch.times
        if m == 1:
            contributions = np.exp(A[0, 0] * lags)[:, None] * batch.marks
        else:
            propagators = expm(lags[:, None, None] * A[None, :, :])
            contributions = np.einsum('nij,nj->ni', propagators, batch.marks)
        np.add.at(out, batch.replica_index, contributions)
    return out


def _gaussian_covariance(A: np.ndarray, covariance: np.ndarray, t: float) -> np.ndarray:
    """int_0^t e^{sA} Q e^{sA^T} ds by Van Loan's block exponential"""
    m = A.shape[0]
    block = np.zeros((2 * m, 2 * m))
    block[:m, :m] = -A
    block[:m, m:] = covariance
    block[m:, m:] = A.T
    big = expm(block * t)
    F = big[m:, m:].T
    Q = F @ big[:m, m:]
    return 0.5 * (Q + Q.T)


def _batch_endpoints(a: DriftField, batch: ConfigurationBatch, x0: np.ndarray, t: float, M: np.ndarray,
                     step: float, gaussian: Optional[np.ndarray], seed: int) -> np.ndarray:
    """Event-aligned RK4 run for all replicas at once"""
    n, m = batch.n_replicas, x0.size
    x = np.tile(x0, (n, 1))
    s = np.zeros(n)
    ptr = batch.offsets[:-1].copy()
    end = batch.offsets[1:]
    times = np.append(batch.times, np.inf)
    limit = Config.BLOWUP_NORM
    rng = block_stream(seed, 0, PURPOSE_GAUSSIAN) if gaussian is not None else None

    def field_fn(state):
        return a(state) - M

    while True:
        has_event = ptr < end
        next_stop = np.where(has_event, times[np.minimum(ptr, times.size - 1)], t)
        active = (s < next_stop) | has_event
        if not np.any(active):
            break
        idx = np.flatnonzero(active)
        remaining = next_stop[idx] - s[idx]
        arrive = remaining <= step * (1.0 + 1e-9)
        dt = np.where(arrive, remaining, step)
        moving = dt > 0
        if np.any(moving):
            rows = idx[moving]
            x[rows] = _rk4_step(field_fn, x[rows], dt[moving][:, None])
            if gaussian is not None:
                noise = rng.standard_normal((rows.size, m)) * np.sqrt(dt[moving])[:, None]
                x[rows] += noise @ gaussian.T
        s[idx] = np.where(arrive, next_stop[idx], s[idx] + dt)

        jumpers = idx[arrive & has_event[idx]]
        if jumpers.size:
            x[jumpers] += batch.marks[ptr[jumpers]]
            ptr[jumpers] += 1

        worst = float(np.max(np.abs(x[idx]))) if idx.size else 0.0
        if not np.isfinite(worst) or worst > limit:
            raise BlowUp(float(np.max(s[idx])), worst)
    return x


def simulate_endpoints(a: DriftField, measure: LevyMeasure, scheme: CutoffScheme, x0, t: float,
                       n: int, seed: int, step: Optional[float] = None,
                       event_budget: Optional[float] = None) -> np.ndarray:
    """X(x0, t) for n independent replicas, shape (n, m)"""
    x0 = np.atleast_1d(np.asarray(x0, dtype=float))
    if x0.shape != (a.dim,):
        raise InvalidParams(f"x0 must have length {a.dim}")
    if t <= 0:
        raise InvalidParams("the horizon must be positive")
    batch = sample_batch(measure, (0.0, t), scheme.eps_cut, n, seed, event_budget=event_budget)
    M = scheme.compensator
    gaussian = scheme.gaussian_factor() if scheme.mode is SmallJumpMode.GAUSSIAN_MATCH else None

    if a.is_linear:
        out = _linear_endpoints(a.matrix, batch, x0, t, M)
        if gaussian is not None:
            values, vectors = np.linalg.eigh(_gaussian_covariance(a.matrix, scheme.covariance, t))
            factor = vectors * np.sqrt(np.clip(values, 0.0, None))[None, :]
            for block, start, stop in replica_blocks(n):
                draws = block_stream(seed, block, PURPOSE_GAUSSIAN).standard_normal((stop - start, a.dim))
                out[start:stop] += draws @ factor.T
        _check_norm(out, t, Config.BLOWUP_NORM)
        return out

    return _batch_endpoints(a, batch, x0, t, M, float(step or Config.RK4_STEP), gaussian, seed)


def default_burn_in(a: DriftField) -> float:
    """20 / gamma for a dissipative drift, so that exp(-gamma T) is negligible"""
    report = dissipativity_check(a)
    return 20.0 / report.gamma_estimate if report.holds else 20.0


def stationary_sample(a: DriftField, measure: LevyMeasure, scheme: CutoffScheme,
                      burn_in: Optional[float] = None, n_samples: int = 10_000, seed: int = 0,
                      x0=None, step: Optional[float] = None) -> np.ndarray:
    """Approximate draws from the stationary law: endpoints after a burn-in from x0 = 0"""
    report = dissipativity_check(a)
    if not report.holds:
        logger.warning("Drift %s fails the dissipativity check (gamma estimate %.3g); "
                       "stationary samples may blow up", a.label, report.gamma_estimate)
    if burn_in is None:
        burn_in = 20.0 / report.gamma_estimate if report.holds else 20.0
    x0 = np.zeros(a.dim) if x0 is None else x0
    logger.debug("Stationary sampling with burn-in %.3g", burn_in)
    return simulate_endpoints(a, measure, scheme, x0, burn_in, n_samples, seed, step=step)
