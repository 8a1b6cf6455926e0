#!/usr/bin/env python3
"""
Density Estimates
=================

Histogram and Gaussian kernel density estimates on a rectangular lattice.
Values are densities per unit volume, one per lattice cell. Kernel
estimates are exact (scikit-learn) while samples x cells stays below
Config.EXACT_KDE_LIMIT, otherwise binned counts are smoothed with a
Gaussian filter.
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.ndimage import gaussian_filter
from sklearn.neighbors import KernelDensity

from config.settings import Config
from ..errors import InvalidParams, TooFewSamples

logger = logging.getLogger(__name__)

KERNEL_TRUNCATION = 4.0


class DensityKind(Enum):
    HISTOGRAM = "histogram"
    KDE = "kde"


@dataclass
class DensityEstimate:
    """Density values on the cells of a rectangular lattice"""
    kind: DensityKind
    edges: List[np.ndarray]
    values: np.ndarray
    n_samples: int
    bandwidth: Optional[np.ndarray] = None
    method: str = "histogram"
    coverage: float = 1.0
    metadata: Dict[str, Any] = field(default_factory=dict)

    @property
    def dim(self) -> int:
        return len(self.edges)

    @property
    def widths(self) -> List[np.ndarray]:
        return [np.diff(e) for e in self.edges]

    @property
    def centers(self) -> List[np.ndarray]:
        return [0.5 * (e[1:] + e[:-1]) for e in self.edges]

    @property
    def cell_volumes(self) -> np.ndarray:
        volumes = self.widths[0]
        for w in self.widths[1:]:
            volumes = np.multiply.outer(volumes, w)
        return volumes

    def integral(self) -> float:
        return float(np.sum(self.values * self.cell_volumes))

    def max_value(self) -> float:
        return float(self.values.max()) if self.values.size else 0.0

    def argmax(self) -> List[float]:
        index = np.unravel_index(int(np.argmax(self.values)), self.values.shape)
        return [float(c[i]) for c, i in zip(self.centers, index)]

    def value_at(self, x) -> float:
        """Value of the cell containing x, 0 off the lattice"""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        index = []
        for e, xi in zip(self.edges, x):
            i = int(np.searchsorted(e, xi, side='right')) - 1
            if xi == e[-1]:
                i = len(e) - 2
            if i < 0 or i >= len(e) - 1:
                return 0.0
            index.append(i)
        return float(self.values[tuple(index)])

    def same_lattice(self, other: "DensityEstimate") -> bool:
        return self.dim == other.dim and all(
            a.shape == b.shape and np.allclose(a, b, rtol=1e-12, atol=0.0) for a, b in zip(self.edges, other.edges))

    def to_dict(self, include_values: bool = False) -> Dict[str, Any]:
        out = {
            'kind': self.kind.value,
            'method': self.method,
            'dim': self.dim,
            'n_samples': self.n_samples,
            'bandwidth': None if self.bandwidth is None else self.bandwidth.tolist(),
            'lattice': [{'lo': float(e[0]), 'hi': float(e[-1]), 'cells': int(len(e) - 1)} for e in self.edges],
            'integral': self.integral(),
            'coverage': self.coverage,
            'max': self.max_value(),
            'argmax': self.argmax(),
        }
        if include_values:
            out['values'] = self.values.tolist()
        return out


def _as_samples(samples) -> np.ndarray:
    samples = np.asarray(samples, dtype=float)
    if samples.ndim == 1:
        samples = samples[:, None]
    if samples.ndim != 2:
        raise InvalidParams("samples must be a vector or an (n, dim) array")
    if not np.all(np.isfinite(samples)):
        raise InvalidParams("samples contain non-finite values")
    return samples


def silverman_bandwidth(samples) -> np.ndarray:
    """
    Per-axis rule of thumb 0.9 min(std, IQR/1.34) n^(-1/5) in one dimension,
    the normal-reference factor (4/(d+2))^(1/(d+4)) n^(-1/(d+4)) above it.
    """
    samples = _as_samples(samples)
    n, d = samples.shape
    std = samples.std(axis=0)
    q75, q25 = np.percentile(samples, [75, 25], axis=0)
    spread = np.minimum(std, (q75 - q25) / 1.34)
    spread = np.where(spread > 0, spread, std)
    if d == 1:
        bw = 0.9 * spread * n ** (-0.2)
    else:
        bw = (4.0 / (d + 2.0)) ** (1.0 / (d + 4.0)) * n ** (-1.0 / (d + 4.0)) * spread
    # point masses: a bandwidth on the scale of the values themselves
    fallback = 1e-3 * (np.abs(samples.mean(axis=0)) + 1.0)
    return np.where(bw > 0, bw, fallback)


def _default_cells(dim: int) -> int:
    if dim == 1:
        return int(Config.DENSITY_LATTICE)
    return 128 if dim == 2 else 32


def lattice_for(samples, cells: Optional[int] = None, pad=None) -> List[np.ndarray]:
    """Edges covering the samples, padded per axis"""
    samples = _as_samples(samples)
    d = samples.shape[1]
    cells = int(cells or _default_cells(d))
    lo, hi = samples.min(axis=0), samples.max(axis=0)
    pad = np.zeros(d) if pad is None else np.broadcast_to(np.asarray(pad, dtype=float), (d,))
    edges = []
    for k in range(d):
        a, b = lo[k] - pad[k], hi[k] + pad[k]
        if b - a <= 0:
            a, b = a - 0.5, b + 0.5
        edges.append(np.linspace(a, b, cells + 1))
    return edges


def common_lattice(*sample_sets, cells: Optional[int] = None, pad=None) -> List[np.ndarray]:
    """One lattice covering several sample sets"""
    return lattice_for(np.vstack([_as_samples(s) for s in sample_sets]), cells, pad)


def _histogram(samples: np.ndarray, edges: List[np.ndarray]) -> Tuple[np.ndarray, int]:
    counts, _ = np.histogramdd(samples, bins=edges)
    return counts, int(counts.sum())


def _lattice_points(edges: List[np.ndarray]) -> np.ndarray:
    centers = [0.5 * (e[1:] + e[:-1]) for e in edges]
    mesh = np.meshgrid(*centers, indexing='ij')
    return np.column_stack([m.ravel() for m in mesh])


def density_estimate(samples, kind: Union[str, DensityKind] = DensityKind.KDE, bins: Optional[int] = None,
                     bounds: Optional[Sequence[Tuple[float, float]]] = None, lattice: Optional[List[np.ndarray]] = None,
                     bandwidth=None, bw_factor: float = 1.0, method: str = "auto") -> DensityEstimate:
    """
    Histogram or Gaussian KDE of the samples.

    The lattice is taken from `lattice` (edges per axis), else from `bounds`
    and `bins`, else it covers the samples (padded by four bandwidths for
    a KDE). The bandwidth defaults to the Silverman rule times bw_factor.
    """
    kind = DensityKind(kind)
    samples = _as_samples(samples)
    n, d = samples.shape
    if n < Config.MIN_DENSITY_SAMPLES:
        raise TooFewSamples(f"{n} samples, at least {Config.MIN_DENSITY_SAMPLES} required")
    if method not in ("auto", "exact", "binned"):
        raise InvalidParams(f"unknown estimation method {method!r}")

    bw = None
    if kind == DensityKind.KDE:
        bw = silverman_bandwidth(samples) if bandwidth is None else np.broadcast_to(
            np.asarray(bandwidth, dtype=float), (d,)).copy()
        bw = bw * float(bw_factor)
        if np.any(bw <= 0):
            raise InvalidParams("bandwidth must be positive")

    if lattice is not None:
        edges = [np.asarray(e, dtype=float) for e in lattice]
        if len(edges) != d:
            raise InvalidParams("lattice dimension does not match the samples")
    elif bounds is not None:
        cells = int(bins or _default_cells(d))
        edges = [np.linspace(a, b, cells + 1) for a, b in bounds]
    else:
        edges = lattice_for(samples, bins, None if bw is None else KERNEL_TRUNCATION * bw)

    volumes = DensityEstimate(kind, edges, np.zeros(0), n).cell_volumes
    counts, inside = _histogram(samples, edges)
    coverage = inside / n

    if kind == DensityKind.HISTOGRAM:
        return DensityEstimate(kind, edges, counts / (n * volumes), n, None, "histogram", coverage)

    n_points = int(np.prod([len(e) - 1 for e in edges]))
    if method == "exact" or (method == "auto" and n * n_points <= Config.EXACT_KDE_LIMIT):
        model = KernelDensity(kernel='gaussian', bandwidth=1.0).fit(samples / bw)
        log_density = model.score_samples(_lattice_points(edges) / bw)
        values = np.exp(log_density).reshape(volumes.shape) / float(np.prod(bw))
        used = "exact"
    else:
        widths = np.array([e[1] - e[0] for e in edges])
        smoothed = gaussian_filter(counts, sigma=bw / widths, mode='constant', truncate=KERNEL_TRUNCATION)
        values = smoothed / (n * volumes)
        used = "binned"

    logger.debug("KDE of %d samples on %d cells (%s)", n, n_points, used)
    return DensityEstimate(kind, edges, values, n, bw, used, coverage)


def bandwidth_ladder(samples, factors: Optional[Sequence[float]] = None,
                     lattice: Optional[List[np.ndarray]] = None) -> List[DensityEstimate]:
    """KDEs at the Silverman bandwidth times each factor, on one lattice"""
    factors = tuple(factors or Config.BANDWIDTH_LADDER)
    samples = _as_samples(samples)
    base = silverman_bandwidth(samples)
    if lattice is None:
        pad = KERNEL_TRUNCATION * base * max(factors)
        span = float(np.max(np.ptp(samples, axis=0) + 2.0 * pad))
        # at least four cells per smallest bandwidth
        cells = int(np.clip(np.ceil(4.0 * span / float(np.min(base)) / min(factors)), _default_cells(samples.shape[1]), 8192))
        lattice = lattice_for(samples, cells if samples.shape[1] == 1 else None, pad)
    return [density_estimate(samples, DensityKind.KDE, lattice=lattice, bandwidth=base * f) for f in factors]
