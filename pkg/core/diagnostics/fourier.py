#!/usr/bin/env python3
"""
Fourier Probes
==============

Empirical characteristic function moduli with their Monte Carlo standard
error, the exact modulus of the pure-jump part of a Levy process

    |E exp{i (z, U_t)}| = exp{ t int (cos(z, u) - 1) Pi(du) }

and the factorial frequency ladder 2 pi N! along which singular laws keep
|phi| away from zero.
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
from scipy import integrate
from scipy.special import gammaln

from config.settings import Config
from ..errors import InvalidParams
from ..measures.levy_measure import AtomicSequence, LevyMeasure, Mixture, RadialDensity

logger = logging.getLogger(__name__)

PROBE_CHUNK = 65536


@dataclass
class CharProbe:
    """|phi_hat(z)| per frequency with standard error N^-1/2"""
    z: np.ndarray
    modulus: np.ndarray
    real: np.ndarray
    imag: np.ndarray
    n_samples: int
    analytic: Optional[np.ndarray] = None
    labels: List[str] = field(default_factory=list)

    @property
    def standard_error(self) -> float:
        return float(self.n_samples ** -0.5)

    def within(self, n_se: float = 4.0) -> np.ndarray:
        """Agreement with the analytic modulus within n_se standard errors"""
        if self.analytic is None:
            raise InvalidParams("no analytic modulus attached to this probe")
        return np.abs(self.modulus - self.analytic) <= n_se * self.standard_error

    def increasing(self) -> bool:
        return bool(np.all(np.diff(self.modulus) > 0))

    def rows(self) -> List[Dict[str, Any]]:
        out = []
        for k in range(len(self.modulus)):
            z = self.z[k]
            row = {
                'label': self.labels[k] if self.labels else str(k),
                'z': float(z) if np.ndim(z) == 0 else ' '.join(f"{v:.10g}" for v in z),
                'modulus': float(self.modulus[k]),
                'se': self.standard_error,
            }
            if self.analytic is not None:
                row['analytic'] = float(self.analytic[k])
            out.append(row)
        return out

    def to_dict(self) -> Dict[str, Any]:
        return {'n_samples': self.n_samples, 'standard_error': self.standard_error, 'table': self.rows()}


def char_function_probe(samples, z_list, labels: Sequence[str] = ()) -> CharProbe:
    """
    |N^-1 sum_j exp{i (z, X_j)}| for every z.

    Samples may be (n,) with scalar z or (n, d) with z of length d; a
    scalar z against d-dimensional samples probes the first coordinate.
    """
    samples = np.asarray(samples, dtype=float)
    if samples.ndim == 1:
        samples = samples[:, None]
    z = np.asarray(z_list, dtype=float)
    if not np.all(np.isfinite(z)):
        raise InvalidParams("frequencies must be finite")
    if z.ndim <= 1:
        freqs = np.zeros((z.size, samples.shape[1]))
        freqs[:, 0] = z.ravel()
    else:
        freqs = z
        if freqs.shape[1] != samples.shape[1]:
            raise InvalidParams("frequency vectors must match the sample dimension")

    n = samples.shape[0]
    if n == 0:
        raise InvalidParams("no samples")
    re = np.zeros(len(freqs))
    im = np.zeros(len(freqs))
    for start in range(0, n, PROBE_CHUNK):
        phase = samples[start:start + PROBE_CHUNK] @ freqs.T
        re += np.cos(phase).sum(axis=0)
        im += np.sin(phase).sum(axis=0)
    re /= n
    im /= n
    modulus = np.minimum(np.hypot(re, im), 1.0)
    return CharProbe(z if z.ndim > 1 else z.ravel(), modulus, re, im, n, labels=list(labels))


def factorial_frequencies(n_list: Sequence[int]) -> np.ndarray:
    """2 pi N! for each N; N is capped at Config.MAX_FACTORIAL_N"""
    n_list = [int(n) for n in n_list]
    if any(n < 0 for n in n_list):
        raise InvalidParams("factorial indices must be nonnegative")
    if max(n_list, default=0) > Config.MAX_FACTORIAL_N:
        raise InvalidParams(f"factorial frequencies are capped at N = {Config.MAX_FACTORIAL_N}")
    return 2.0 * np.pi * np.exp(gammaln(np.asarray(n_list, dtype=float) + 1.0)).round()


def _atomic_exponent(locations: np.ndarray, weights: np.ndarray, freqs: np.ndarray) -> np.ndarray:
    phase = locations @ freqs.T
    # cos x - 1 = -2 sin^2(x/2) keeps the small-jump terms accurate
    return -2.0 * (weights @ np.sin(0.5 * phase) ** 2)


def _radial_exponent(measure: RadialDensity, freqs: np.ndarray, eps_cut: float) -> np.ndarray:
    profile = measure.profile
    upper = getattr(profile, 'upper', np.inf)
    out = np.zeros(len(freqs))
    for j, freq in enumerate(freqs):
        total = 0.0
        for node, p in zip(measure.angular.nodes, measure.angular.probs):
            k = abs(float(node @ freq))
            if k == 0 or p == 0 or eps_cut >= upper:
                continue
            split = min(max(2.0 * np.pi / k, eps_cut), upper)

            def inner(r, k=k):
                return -2.0 * np.sin(0.5 * k * r) ** 2 * profile.density(r)

            near, _ = integrate.quad(inner, eps_cut, split, epsabs=Config.QUAD_EPSABS,
                                     epsrel=Config.QUAD_EPSREL, limit=Config.QUAD_LIMIT)
            far = 0.0
            if split < upper:
                oscillating, _ = integrate.quad(profile.density, split, upper, weight='cos', wvar=k,
                                                limit=Config.QUAD_LIMIT)
                far = oscillating - float(profile.tail_mass(split) - profile.tail_mass(upper)
                                          if np.isfinite(upper) else profile.tail_mass(split))
            total += p * (near + far)
        out[j] = total
    return out


def _exponent(measure: LevyMeasure, freqs: np.ndarray, eps_cut: float) -> np.ndarray:
    if isinstance(measure, Mixture):
        return sum(c * _exponent(m, freqs, eps_cut) for c, m in measure.components)
    if isinstance(measure, AtomicSequence):
        points, weights = measure.discretize(max(eps_cut, 0.0))
        if len(weights) == 0:
            return np.zeros(len(freqs))
        return _atomic_exponent(points, weights, freqs)
    if isinstance(measure, RadialDensity):
        return _radial_exponent(measure, freqs, eps_cut)
    raise InvalidParams(f"no analytic characteristic function for {type(measure).__name__}")


def analytic_char_modulus(measure: LevyMeasure, z_list, t: float, eps_cut: float = 0.0) -> np.ndarray:
    """exp{t int_{|u| >= eps_cut} (cos(z, u) - 1) Pi(du)} per frequency"""
    if t < 0:
        raise InvalidParams("time must be nonnegative")
    z = np.asarray(z_list, dtype=float)
    if z.ndim <= 1:
        freqs = np.zeros((z.size, measure.dim))
        freqs[:, 0] = z.ravel()
    else:
        freqs = z
    return np.exp(t * _exponent(measure, freqs, float(eps_cut)))
