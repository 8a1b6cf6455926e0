#!/usr/bin/env python3
"""
Drift Fields
============

Drift coefficients a: R^m -> R^m with gradients. Builtin kinds carry
analytic gradients; custom fields fall back to central differences.
Evaluators are vectorised: they accept a point (m,) or a batch (n, m).
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Callable, Dict, Optional, Sequence

import numpy as np
from numpy.polynomial import Polynomial
from scipy.stats import qmc

from ..errors import InvalidParams

logger = logging.getLogger(__name__)

FD_STEP = 1e-6


class DriftKind(Enum):
    """Builtin drift tags"""
    LINEAR = "linear"
    NEG_IDENTITY = "neg_identity"
    POLYNOMIAL_1D = "polynomial"
    CUSTOM = "custom"


def _batch(x, dim: int) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim == 1 and dim == 1 and x.shape[0] != 1:
        return x[:, None]
    return np.atleast_2d(x)


@dataclass
class DriftField:
    """Drift coefficient with its gradient"""
    dim: int
    kind: DriftKind
    evaluator: Callable[[np.ndarray], np.ndarray]
    gradient: Optional[Callable[[np.ndarray], np.ndarray]] = None
    lipschitz_bound: Optional[float] = None
    matrix: Optional[np.ndarray] = None
    coefficients: Optional[Sequence[float]] = None
    label: str = "drift"
    params: Dict[str, Any] = field(default_factory=dict)

    def __call__(self, x) -> np.ndarray:
        """a(x) for a point (m,) or a batch (n, m)"""
        x = np.asarray(x, dtype=float)
        single = x.ndim == 0 or (x.ndim == 1 and x.shape[0] == self.dim)
        values = self.evaluator(_batch(x, self.dim))
        return values[0] if single else values

    def grad(self, x) -> np.ndarray:
        """Jacobian (m, m) for a point, (n, m, m) for a batch"""
        x = np.asarray(x, dtype=float)
        single = x.ndim == 0 or (x.ndim == 1 and x.shape[0] == self.dim)
        pts = _batch(x, self.dim)
        if self.gradient is not None:
            jac = self.gradient(pts)
        else:
            jac = finite_difference_gradient(self.evaluator, pts)
        return jac[0] if single else jac

    @property
    def is_linear(self) -> bool:
        return self.matrix is not None

    def describe(self) -> Dict[str, Any]:
        out = {'kind': self.kind.value, 'dim': self.dim, 'label': self.label}
        if self.matrix is not None:
            out['matrix'] = self.matrix.tolist()
        if self.coefficients is not None:
            out['coefficients'] = list(self.coefficients)
        return out


def finite_difference_gradient(fn: Callable[[np.ndarray], np.ndarray], pts: np.ndarray,
                               step: float = FD_STEP) -> np.ndarray:
    """Central-difference Jacobian of a vectorised field"""
    n, m = pts.shape
    jac = np.empty((n, m, m))
    for j in range(m):
        e = np.zeros(m)
        e[j] = step
        jac[:, :, j] = (fn(pts + e) - fn(pts - e)) / (2.0 * step)
    return jac


def linear_drift(matrix) -> DriftField:
    """a(x) = A x"""
    A = np.atleast_2d(np.asarray(matrix, dtype=float))
    if A.shape[0] != A.shape[1]:
        raise InvalidParams(f"linear drift needs a square matrix, got shape {A.shape}")
    m = A.shape[0]
    return DriftField(
        dim=m,
        kind=DriftKind.LINEAR,
        evaluator=lambda x: x @ A.T,
        gradient=lambda x: np.broadcast_to(A, (x.shape[0], m, m)).copy(),
        lipschitz_bound=float(np.linalg.norm(A, 2)),
        matrix=A,
        label="linear",
    )


def neg_identity(dim: int = 1) -> DriftField:
    """a(x) = -x"""
    drift = linear_drift(-np.eye(dim))
    drift.kind = DriftKind.NEG_IDENTITY
    drift.label = "neg_identity"
    return drift


def zero_drift(dim: int = 1) -> DriftField:
    drift = linear_drift(np.zeros((dim, dim)))
    drift.label = "zero"
    return drift


def polynomial_drift(coefficients: Sequence[float]) -> DriftField:
    """One-dimensional a(x) = sum_k c_k x^k, coefficients in increasing degree"""
    poly = Polynomial(np.asarray(coefficients, dtype=float))
    deriv = poly.deriv()
    return DriftField(
        dim=1,
        kind=DriftKind.POLYNOMIAL_1D,
        evaluator=lambda x: poly(x[:, :1]),
        gradient=lambda x: deriv(x[:, :1])[:, :, None],
        coefficients=[float(c) for c in coefficients],
        label=f"polynomial(deg={poly.degree()})",
    )


def custom_drift(fn: Callable[[np.ndarray], np.ndarray], dim: int,
                 gradient: Optional[Callable[[np.ndarray], np.ndarray]] = None,
                 label: str = "custom") -> DriftField:
    """Wrap a vectorised field fn: (n, m) -> (n, m)"""
    return DriftField(dim=dim, kind=DriftKind.CUSTOM, evaluator=fn, gradient=gradient, label=label)


def delta(a: DriftField, x, u) -> np.ndarray:
    """Delta(x, u) = a(x + u) - a(x)"""
    x = np.asarray(x, dtype=float)
    u = np.asarray(u, dtype=float)
    return a(x + u) - a(x)


def _box_samples(dim: int, half_width: float, n: int, seed: int) -> np.ndarray:
    sampler = qmc.Halton(d=dim, scramble=True, seed=seed)
    return qmc.scale(sampler.random(n), -half_width * np.ones(dim), half_width * np.ones(dim))


def linear_growth_constant(a: DriftField, half_width: float = 10.0, n_points: int = 1024,
                           seed: int = 0) -> float:
    """Smallest K with |a(x)|^2 <= K (1 + |x|^2) on a sample box"""
    pts = _box_samples(a.dim, half_width, n_points, seed)
    values = a(pts)
    ratios = np.sum(values ** 2, axis=1) / (1.0 + np.sum(pts ** 2, axis=1))
    return float(ratios.max())


def gradient_consistency(a: DriftField, n_points: int = 100, half_width: float = 2.0,
                         seed: int = 0) -> float:
    """Max relative deviation between the gradient and central differences"""
    pts = _box_samples(a.dim, half_width, n_points, seed)
    analytic = a.grad(pts)
    numeric = finite_difference_gradient(a.evaluator, pts)
    scale = np.maximum(np.linalg.norm(analytic, axis=(1, 2)), 1.0)
    return float(np.max(np.linalg.norm(analytic - numeric, axis=(1, 2)) / scale))


def sup_gradient_norm(a: DriftField, states: np.ndarray) -> float:
    """C(a): largest spectral norm of the gradient over the given states"""
    states = _batch(states, a.dim)
    if a.matrix is not None:
        return float(np.linalg.norm(a.matrix, 2))
    jac = a.grad(states)
    return float(np.max(np.linalg.norm(jac, ord=2, axis=(1, 2)))) if len(states) else 0.0
