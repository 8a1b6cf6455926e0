#!/usr/bin/env python3
"""
Configuration Transforms
========================

Transformations of point configurations by time stretches: every event
whose mark lies in the set Gamma has its time moved to T_{-scale h} tau,
other events stay put. The admissibility density

    p = exp{ sum_{tau in Gamma} r(tau) - c_inf Pi(Gamma) }

reweights the untransformed law into the transformed one. Finite
differences along such transformations give directional derivatives of
functionals of the configuration.
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence

import numpy as np

from ..errors import InvalidParams, NonConvergent
from ..simulation.point_measure import ConfigurationBatch, PointConfiguration, cell_mask
from .stretch import TimeStretch, stretch_rate, time_stretch_map

logger = logging.getLogger(__name__)

DEFAULT_FD_EPS = (1e-2, 1e-3, 1e-4)


def transform_configuration(config: PointConfiguration, stretch: TimeStretch, cell=None,
                            scale: float = 1.0, step: Optional[float] = None) -> PointConfiguration:
    """Events in the cell move to T_{-scale h} tau; the result is re-sorted"""
    if scale == 0 or config.n_events == 0:
        return config
    inside = cell_mask(cell, config.times, config.marks, config.aux)
    if not np.any(inside):
        return config
    times = np.array(config.times, copy=True)
    times[inside] = time_stretch_map(stretch, -scale, times[inside], step)
    return config.with_times(times)


def transform_batch(batch: ConfigurationBatch, stretch: TimeStretch, cell=None, scale: float = 1.0,
                    step: Optional[float] = None) -> ConfigurationBatch:
    """transform_configuration applied to every replica of a batch at once"""
    if scale == 0 or batch.times.size == 0:
        return batch
    inside = cell_mask(cell, batch.times, batch.marks, batch.aux)
    times = np.array(batch.times, copy=True)
    if np.any(inside):
        times[inside] = time_stretch_map(stretch, -scale, times[inside], step)
    order = np.lexsort((times, batch.replica_index))
    t0 = min(batch.window[0], float(times.min()))
    t1 = max(batch.window[1], float(np.nextafter(times.max(), np.inf)))
    return ConfigurationBatch((t0, t1), batch.eps_cut, batch.seed, batch.offsets, times[order],
                              batch.marks[order], batch.aux[order],
                              metadata=dict(batch.metadata, transformed=stretch.kind, scale=scale))


def admissibility_density(config: PointConfiguration, stretch: TimeStretch, cell, cell_mass: float,
                          scale: float = 1.0) -> float:
    """p = exp{sum of rates over events in the cell - c_inf * Pi(cell)}"""
    if cell_mass < 0 or not np.isfinite(cell_mass):
        raise InvalidParams("the mark set must carry finite mass")
    if scale == 0:
        return 1.0
    inside = cell_mask(cell, config.times, config.marks, config.aux)
    exponent = -stretch.c_inf(scale) * cell_mass
    if np.any(inside):
        exponent += float(np.sum(stretch_rate(stretch, config.times[inside], scale)))
    return float(np.exp(exponent))


def admissibility_batch(batch: ConfigurationBatch, stretch: TimeStretch, cell, cell_mass: float,
                        scale: float = 1.0) -> np.ndarray:
    """Per-replica admissibility densities"""
    if cell_mass < 0 or not np.isfinite(cell_mass):
        raise InvalidParams("the mark set must carry finite mass")
    exponents = np.full(batch.n_replicas, -stretch.c_inf(scale) * cell_mass)
    if scale != 0 and batch.times.size:
        inside = cell_mask(cell, batch.times, batch.marks, batch.aux)
        if np.any(inside):
            rates = stretch_rate(stretch, batch.times[inside], scale)
            np.add.at(exponents, batch.replica_index[inside], rates)
    return np.exp(exponents)


@dataclass
class FiniteDifferenceReport:
    """Difference quotients along T_{eps h} for a list of eps"""
    eps: List[float]
    estimates: np.ndarray
    extrapolated: np.ndarray
    order: Optional[float]
    scheme: str
    errors: Optional[np.ndarray] = None
    error_slope: Optional[float] = None
    metadata: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'eps': self.eps,
            'estimates': self.estimates.tolist(),
            'extrapolated': self.extrapolated.tolist(),
            'order': self.order,
            'scheme': self.scheme,
            'errors': None if self.errors is None else self.errors.tolist(),
            'error_slope': self.error_slope,
        }


def _log_slope(x: Sequence[float], y: Sequence[float]) -> Optional[float]:
    x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    keep = (x > 0) & (y > 0)
    if keep.sum() < 2:
        return None
    return float(np.polyfit(np.log(x[keep]), np.log(y[keep]), 1)[0])


def finite_diff_derivative(functional: Callable[[PointConfiguration], Any], config: PointConfiguration,
                           stretch: TimeStretch, cell=None, eps_list: Sequence[float] = DEFAULT_FD_EPS,
                           scheme: str = "central", reference=None, tol: Optional[float] = None,
                           step: Optional[float] = None) -> FiniteDifferenceReport:
    """
    Directional derivative of a functional along the group T_{eps h}.

    Central quotients (f(T_eps) - f(T_-eps)) / (2 eps) converge at order 2,
    forward quotients at order 1; the Richardson-extrapolated value uses the
    two smallest eps. When a reference derivative is given the errors and
    their log-log slope against eps are reported as well.
    """
    if scheme not in ("central", "forward"):
        raise InvalidParams(f"unknown difference scheme {scheme!r}")
    eps_list = sorted((float(e) for e in eps_list), reverse=True)
    if len(eps_list) < 2 or eps_list[-1] <= 0:
        raise InvalidParams("at least two positive eps values are required")

    base = np.atleast_1d(np.asarray(functional(config), dtype=float))
    estimates = []
    for eps in eps_list:
        plus = np.atleast_1d(np.asarray(functional(transform_configuration(config, stretch, cell, eps, step)),
                                        dtype=float))
        if scheme == "central":
            minus = np.atleast_1d(np.asarray(
                functional(transform_configuration(config, stretch, cell, -eps, step)), dtype=float))
            estimates.append((plus - minus) / (2.0 * eps))
        else:
            estimates.append((plus - base) / eps)
    estimates = np.vstack(estimates)

    p = 2.0 if scheme == "central" else 1.0
    ratio = eps_list[-2] / eps_list[-1]
    extrapolated = estimates[-1] + (estimates[-1] - estimates[-2]) / (ratio ** p - 1.0)

    diffs = np.linalg.norm(np.diff(estimates, axis=0), axis=1)
    order = None
    if len(diffs) >= 2 and diffs[-1] > 0 and diffs[-2] > 0:
        order = float(np.log(diffs[-2] / diffs[-1]) / np.log(eps_list[-2] / eps_list[-1]))

    if tol is None:
        tol = 1e-3 if scheme == "central" else 1e-2
    scale = max(1.0, float(np.linalg.norm(extrapolated)))
    if diffs[-1] > tol * scale:
        raise NonConvergent(f"difference quotients still moved by {diffs[-1]:.3g} at eps={eps_list[-1]:g}")

    errors = slope = None
    if reference is not None:
        reference = np.atleast_1d(np.asarray(reference, dtype=float))
        errors = np.linalg.norm(estimates - reference[None, :], axis=1)
        slope = _log_slope(eps_list, errors)

    return FiniteDifferenceReport(eps_list, estimates, extrapolated, order, scheme, errors, slope,
                                  metadata={'events': config.n_events})
