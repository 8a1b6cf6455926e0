#!/usr/bin/env python3
"""Turn validated specs into measures, drifts, stretches and mark sets"""

from typing import Optional

import numpy as np

from ..drift import DriftField, linear_drift, neg_identity, polynomial_drift, zero_drift
from ..errors import ConfigError, InvalidParams
from ..measures import (LevyMeasure, Mixture, factorial_atoms, finite_atoms, geometric_atoms, parabola_atoms,
                        stable_measure, zero_measure)
from ..simulation import CutoffScheme, default_eps_cut, make_scheme
from ..variations import TimeStretch, bump_stretch, indicator_stretch
from . import schema


def build_measure(spec) -> LevyMeasure:
    try:
        if isinstance(spec, schema.GeometricAtomsSpec):
            return geometric_atoms(spec.gamma, spec.dim, spec.direction, spec.weight, spec.n_max)
        if isinstance(spec, schema.FactorialAtomsSpec):
            return factorial_atoms(spec.n_max)
        if isinstance(spec, schema.ParabolaAtomsSpec):
            return parabola_atoms(spec.n_max)
        if isinstance(spec, schema.FiniteAtomsSpec):
            return finite_atoms(np.asarray(spec.locations, dtype=float), np.asarray(spec.weights, dtype=float))
        if isinstance(spec, schema.StableSpec):
            upper = np.inf if spec.upper is None else spec.upper
            return stable_measure(spec.alpha, spec.dim, spec.scale, upper, spec.one_sided)
        if isinstance(spec, schema.ZeroMeasureSpec):
            return zero_measure(spec.dim)
        if isinstance(spec, schema.MixtureSpec):
            return Mixture([(c.weight, build_measure(c.measure)) for c in spec.components])
    except InvalidParams as e:
        raise ConfigError(f"measure {spec.kind}: {e}") from e
    raise ConfigError(f"unsupported measure kind {getattr(spec, 'kind', spec)!r}")


def build_drift(spec) -> DriftField:
    try:
        if isinstance(spec, schema.LinearDriftSpec):
            return linear_drift(spec.matrix)
        if isinstance(spec, schema.NegIdentitySpec):
            return neg_identity(spec.dim)
        if isinstance(spec, schema.ZeroDriftSpec):
            return zero_drift(spec.dim)
        if isinstance(spec, schema.PolynomialDriftSpec):
            return polynomial_drift(spec.coefficients)
    except InvalidParams as e:
        raise ConfigError(f"drift {spec.kind}: {e}") from e
    raise ConfigError(f"unsupported drift kind {getattr(spec, 'kind', spec)!r}")


def build_stretch(spec: schema.StretchSpec) -> TimeStretch:
    try:
        if spec.kind == "indicator":
            return indicator_stretch(spec.a, spec.b, spec.level)
        return bump_stretch(spec.a, spec.b, spec.beta, spec.level)
    except InvalidParams as e:
        raise ConfigError(f"stretch: {e}") from e


class MarkBandCell:
    """Mark set {lo <= |u| < hi}"""

    def __init__(self, lo: float = 0.0, hi: Optional[float] = None):
        self.lo = float(lo)
        self.hi = np.inf if hi is None else float(hi)
        if self.hi <= self.lo:
            raise ConfigError("mark band needs lo < hi")

    def __call__(self, marks: np.ndarray) -> np.ndarray:
        norms = np.linalg.norm(np.atleast_2d(marks), axis=1)
        return (norms >= self.lo) & (norms < self.hi)

    def mass(self, measure: LevyMeasure, eps_cut: float) -> float:
        return measure.mass_between(max(self.lo, eps_cut), self.hi)


def build_cell(spec: schema.MarkBand) -> MarkBandCell:
    return MarkBandCell(spec.lo, spec.hi)


def build_scheme(scenario: schema.ScenarioSpec, measure: LevyMeasure) -> CutoffScheme:
    eps_cut = scenario.budgets.eps_cut or default_eps_cut(measure)
    try:
        return make_scheme(measure, eps_cut, scenario.small_jumps, compensate=scenario.compensate)
    except InvalidParams as e:
        raise ConfigError(f"scenario {scenario.id}: {e}") from e


def initial_point(scenario: schema.ScenarioSpec, dim: int) -> np.ndarray:
    if scenario.x0 is None:
        return np.zeros(dim)
    x0 = np.asarray(scenario.x0, dtype=float)
    if x0.shape != (dim,):
        raise ConfigError(f"scenario {scenario.id}: x0 must have length {dim}")
    return x0
