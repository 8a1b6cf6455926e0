#!/usr/bin/env python3
"""
Drift Certificates
==================

Sampled evidence for the drift non-degeneracy classes K_r, the
non-degeneracy trend of the jump increments, dissipativity at infinity,
and the structural conditions that make linear drifts non-degenerate
without the wide cone condition. None of these is a proof; each report
says what was sampled.
"""

import logging
import warnings
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
from scipy.linalg import null_space
from scipy.stats import qmc

from ..errors import DegenerateGradientWarning, InvalidParams
from ..measures.directions import direction_grid, validate_aperture
from ..measures.indices import WIDE_CONE_FLOORS
from ..measures.levy_measure import LevyMeasure
from .fields import DriftField

logger = logging.getLogger(__name__)

PASS_THRESHOLD = 1e-8
SINGULAR_THRESHOLD = 1e-8
RAY_ANGLES = 8
RADIUS_LEVELS = 8
MASS_INCREMENT = 0.5


@dataclass
class KrCertificate:
    """Sampled check of |(a(x+y)-a(x), v)| >= D |(y, w)|^r inside V(w, aperture)"""
    r: int
    varrho: float
    points: np.ndarray
    directions: np.ndarray
    witnesses: np.ndarray
    local_constants: np.ndarray
    D: float
    passed: bool
    radii: np.ndarray
    singular_points: int = 0

    def to_dict(self) -> Dict[str, Any]:
        worst = np.unravel_index(np.argmin(self.local_constants), self.local_constants.shape)
        return {
            'r': self.r,
            'varrho': self.varrho,
            'n_x': int(len(self.points)),
            'n_v': int(len(self.directions)),
            'D': self.D,
            'passed': self.passed,
            'radii': self.radii.tolist(),
            'singular_points': self.singular_points,
            'worst_point': self.points[worst[0]].tolist(),
            'worst_direction': self.directions[worst[1]].tolist(),
            'worst_witness': self.witnesses[worst].tolist(),
        }


def _cone_rays(W: np.ndarray, varrho: float) -> np.ndarray:
    """16 unit rays inside each V(w, aperture): 8 opening angles, both orientations"""
    n_w, m = W.shape
    if m == 1:
        return np.stack([W, -W], axis=1)
    cosines = np.linspace(1.0, varrho, RAY_ANGLES)
    sines = np.sqrt(np.clip(1.0 - cosines ** 2, 0.0, None))
    rays = np.empty((n_w, 2 * RAY_ANGLES, m))
    for i, w in enumerate(W):
        complement = null_space(w[None, :]).T
        perps = complement[np.arange(RAY_ANGLES) % len(complement)]
        forward = cosines[:, None] * w[None, :] + sines[:, None] * perps
        rays[i, 0::2] = forward
        rays[i, 1::2] = -forward
    return rays


def _local_constants(a: DriftField, x: np.ndarray, ax: np.ndarray, W: np.ndarray, rays: np.ndarray,
                     V: np.ndarray, r: int, radii: np.ndarray, paired: bool = False) -> np.ndarray:
    """
    Largest D with ratio >= D for all tested |y| <= D, per (w, v) pair,
    or per row when paired (w_j goes with v_j).
    """
    n_w, n_rays, m = rays.shape
    ys = radii[None, :, None, None] * rays[:, None, :, :]
    increments = (a(x[None, :] + ys.reshape(-1, m)) - ax[None, :]).reshape(ys.shape)
    denom = np.abs(np.einsum('wkrm,wm->wkr', ys, W)) ** r
    if paired:
        numer = np.abs(np.einsum('wkrm,wm->wkr', increments, V))[..., None]
    else:
        numer = np.abs(np.einsum('wkrm,vm->wkrv', increments, V))
    ratios = (numer / denom[..., None]).min(axis=2)
    # radii ascend; the condition only needs to hold below the constant itself
    cumulative = np.minimum.accumulate(ratios, axis=1)
    constants = np.max(np.minimum(radii[None, :, None], cumulative), axis=1)
    return constants[:, 0] if paired else constants


def k_r_certificate(a: DriftField, r: int, varrho: float, x_box: float = 2.0, n_x: int = 64,
                    n_v: int = 64, y_radii: Optional[Sequence[float]] = None, d_search: float = 1.0,
                    n_w: Optional[int] = None, seed: int = 0) -> KrCertificate:
    """
    Search, for every sampled (x, v), the witness w maximising the local
    constant; D is the smallest such constant over all samples.

    Witness candidates are the direction lattice plus grad a(x)^T v.
    """
    if r < 1:
        raise InvalidParams(f"power must be a positive integer, got {r}")
    validate_aperture(varrho)
    radii = np.sort(np.asarray(y_radii if y_radii is not None
                               else d_search * 2.0 ** -np.arange(RADIUS_LEVELS), dtype=float))
    if np.any(radii <= 0) or radii[-1] > d_search:
        raise InvalidParams("test radii must lie in (0, d_search]")

    m = a.dim
    sampler = qmc.Halton(d=m, scramble=True, seed=seed)
    points = qmc.scale(sampler.random(n_x), -x_box * np.ones(m), x_box * np.ones(m))
    directions = direction_grid(m, n_v)
    lattice = direction_grid(m, n_w)
    lattice_rays = _cone_rays(lattice, varrho)

    jacobians = a.grad(points)
    singular_values = np.linalg.svd(jacobians, compute_uv=False)[:, -1]
    singular = int(np.sum(singular_values < SINGULAR_THRESHOLD))
    if singular:
        warnings.warn(f"gradient of {a.label} numerically singular at {singular} of {n_x} sample points",
                      DegenerateGradientWarning, stacklevel=2)

    values = a(points)
    constants = np.zeros((n_x, len(directions)))
    witnesses = np.zeros((n_x, len(directions), m))
    for i, x in enumerate(points):
        from_lattice = _local_constants(a, x, values[i], lattice, lattice_rays, directions, r, radii)
        best_idx = np.argmax(from_lattice, axis=0)
        constants[i] = from_lattice[best_idx, np.arange(len(directions))]
        witnesses[i] = lattice[best_idx]

        g = directions @ jacobians[i]
        g_norm = np.linalg.norm(g, axis=1)
        usable = g_norm > SINGULAR_THRESHOLD
        if np.any(usable):
            G = g[usable] / g_norm[usable, None]
            from_gradient = _local_constants(a, x, values[i], G, _cone_rays(G, varrho),
                                             directions[usable], r, radii, paired=True)
            idx = np.flatnonzero(usable)
            better = from_gradient > constants[i, idx]
            constants[i, idx[better]] = from_gradient[better]
            witnesses[i, idx[better]] = G[better]

    D = float(constants.min())
    passed = D > PASS_THRESHOLD
    logger.debug("K_%d certificate for %s: D=%.3g passed=%s", r, a.label, D, passed)
    return KrCertificate(r, float(varrho), points, directions, witnesses, constants, D, passed,
                         radii, singular)


@dataclass
class NondegeneracyReport:
    """Masses Pi(|u| >= 1/n, |(Delta(x,u), v)| > tol) along n_list"""
    x: List[float]
    n_list: List[float]
    tol: float
    directions: np.ndarray
    masses: np.ndarray
    divergent: np.ndarray
    holds: bool
    sweep: Dict[float, bool] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        worst = int(np.argmin(self.masses[:, -1])) if len(self.masses) else 0
        return {
            'x': self.x,
            'n_list': self.n_list,
            'tol': self.tol,
            'direction_count': int(len(self.directions)),
            'divergent_directions': int(self.divergent.sum()),
            'holds': self.holds,
            'weakest_direction': self.directions[worst].tolist() if len(self.directions) else None,
            'weakest_masses': self.masses[worst].tolist() if len(self.masses) else None,
            'tolerance_sweep': {str(k): v for k, v in self.sweep.items()},
            'evidence_only': True,
        }


def _trend_masses(a: DriftField, measure: LevyMeasure, x: np.ndarray, directions: np.ndarray,
                  n_list: Sequence[float], tol: float) -> np.ndarray:
    lo = 1.0 / max(n_list)
    points, weights = measure.discretize(lo)
    if len(weights) == 0:
        return np.zeros((len(directions), len(n_list)))
    increments = a(x[None, :] + points) - a(x)[None, :]
    visible = np.abs(increments @ directions.T) > tol
    norms = np.linalg.norm(points, axis=1)
    masses = np.empty((len(directions), len(n_list)))
    for k, n in enumerate(n_list):
        retained = norms >= 1.0 / n
        masses[:, k] = (weights * retained) @ visible
    return masses


def _divergent(masses: np.ndarray, increment: float = MASS_INCREMENT) -> np.ndarray:
    prev, nxt = masses[:, :-1], masses[:, 1:]
    ratio_ok = (prev > 0) & (nxt >= 2.0 * prev)
    step_ok = (nxt > prev) & (ratio_ok | (nxt - prev >= increment))
    return np.all(step_ok, axis=1)


def nondegeneracy_trend(a: DriftField, measure: LevyMeasure, x, v_grid: Optional[int] = None,
                        n_list: Sequence[float] = (10, 100, 1e4, 1e8), tol: float = 1e-10,
                        tol_sweep: Sequence[float] = (1e-6, 1e-10, 1e-14)) -> NondegeneracyReport:
    """
    Evidence for (a(x+u) - a(x), v) != 0 on an infinite-mass set of jumps:
    each direction's mass must grow at every step along n_list, either
    doubling or gaining at least MASS_INCREMENT.
    """
    if tol <= 0:
        raise InvalidParams("tol must be positive")
    x = np.atleast_1d(np.asarray(x, dtype=float))
    directions = direction_grid(a.dim, v_grid)
    masses = _trend_masses(a, measure, x, directions, n_list, tol)
    divergent = _divergent(masses)

    sweep = {}
    for t in tol_sweep:
        sweep[float(t)] = bool(np.all(_divergent(_trend_masses(a, measure, x, directions, n_list, t))))

    return NondegeneracyReport(x.tolist(), [float(n) for n in n_list], float(tol), directions,
                               masses, divergent, bool(np.all(divergent)), sweep)


@dataclass
class DissipativityReport:
    holds: bool
    gamma_estimate: float
    radius: float
    samples: int

    def to_dict(self) -> Dict[str, Any]:
        return {'holds': self.holds, 'gamma_estimate': self.gamma_estimate,
                'radius': self.radius, 'samples': self.samples}


def dissipativity_check(a: DriftField, R: float = 1.0, n_samples: int = 256,
                        n_directions: Optional[int] = None) -> DissipativityReport:
    """gamma estimate = min of -(a(x), x)/|x|^2 over |x| in [R, 4R]"""
    if R <= 0:
        raise InvalidParams("radius must be positive")
    directions = direction_grid(a.dim, n_directions or 64)
    if a.dim == 2:
        directions = np.vstack([directions, -directions])
    radii = np.linspace(R, 4.0 * R, max(n_samples // len(directions), 2))
    pts = (radii[:, None, None] * directions[None, :, :]).reshape(-1, a.dim)
    values = a(pts)
    gammas = -np.sum(values * pts, axis=1) / np.sum(pts ** 2, axis=1)
    gamma = float(gammas.min())
    return DissipativityReport(gamma > 0, gamma, float(R), int(len(pts)))


def preimage_check(a: DriftField, x, v, measure: LevyMeasure, lo: float = 1e-8,
                   tol: float = 1e-10) -> Dict[str, float]:
    """Mass of jumps |u| >= lo whose increment is orthogonal to v (within tol)"""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    v = np.asarray(v, dtype=float)
    v = v / np.linalg.norm(v)
    points, weights = measure.discretize(lo)
    if len(weights) == 0:
        return {'orthogonal_mass': 0.0, 'orthogonal_points': 0, 'retained_mass': 0.0}
    increments = a(x[None, :] + points) - a(x)[None, :]
    flat = np.abs(increments @ v) <= tol
    return {
        'orthogonal_mass': float(weights[flat].sum()),
        'orthogonal_points': int(flat.sum()),
        'retained_mass': float(weights.sum()),
    }


def subspace_avoidance_check(measure: LevyMeasure, dir_grid: Optional[int] = None, tol: float = 1e-9,
                             floors: Sequence[float] = WIDE_CONE_FLOORS) -> Dict[str, Any]:
    """
    Mass of jumps off every hyperplane through the origin must diverge.

    Hyperplanes are given by their normals: the direction lattice plus, in
    two dimensions, the lines through each atom. Reports the largest number
    of atoms found on one hyperplane.
    """
    floors = np.asarray(floors, dtype=float)
    points, weights = measure.discretize(float(floors.min()))
    normals = direction_grid(measure.dim, dir_grid)
    if measure.dim == 2 and len(points):
        through_atoms = np.column_stack([-points[:, 1], points[:, 0]])
        through_atoms /= np.linalg.norm(through_atoms, axis=1, keepdims=True)
        normals = np.vstack([normals, through_atoms])

    norms = np.linalg.norm(points, axis=1)
    on_plane = np.abs(points @ normals.T) <= tol * norms[:, None]
    off_masses = np.stack([((weights * (norms >= f)) @ ~on_plane) for f in floors], axis=1)
    divergent = np.all(off_masses[:, 1:] >= off_masses[:, :-1] + 0.5, axis=1) if len(points) else \
        np.zeros(len(normals), dtype=bool)
    max_on_plane = int(on_plane.sum(axis=0).max()) if len(points) else 0
    return {
        'holds': bool(np.all(divergent)),
        'max_atoms_on_hyperplane': max_on_plane,
        'hyperplanes_checked': int(len(normals)),
        'floors': floors.tolist(),
    }
