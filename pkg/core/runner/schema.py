#!/usr/bin/env python3
"""
Run Configuration Schema
========================

Pydantic models for run configuration files. A run is a list of scenarios
(inline or referenced by builtin id); each scenario names a Levy measure,
a drift, an experiment and its budgets. Unknown keys are rejected.
"""

import json
from pathlib import Path
from typing import Annotated, Any, Dict, List, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from ..errors import ConfigError

SCHEMA_VERSION = 1


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


# -- measures ---------------------------------------------------------------

class GeometricAtomsSpec(_Strict):
    kind: Literal["geometric"]
    gamma: float = Field(gt=1.0)
    dim: int = Field(default=1, ge=1)
    direction: Optional[List[float]] = None
    weight: float = Field(default=1.0, gt=0.0)
    n_max: Optional[int] = Field(default=None, ge=1)


class FactorialAtomsSpec(_Strict):
    kind: Literal["factorial"]
    n_max: int = Field(default=60, ge=1)


class ParabolaAtomsSpec(_Strict):
    kind: Literal["parabola"]
    n_max: int = Field(default=20, ge=1)


class FiniteAtomsSpec(_Strict):
    kind: Literal["finite_atoms"]
    locations: List[List[float]]
    weights: List[float]

    @model_validator(mode="after")
    def _lengths(self):
        if len(self.locations) != len(self.weights):
            raise ValueError("one weight per atom location is required")
        return self


class StableSpec(_Strict):
    kind: Literal["stable"]
    alpha: float = Field(gt=0.0, lt=2.0)
    dim: int = Field(default=1, ge=1)
    scale: float = Field(default=1.0, gt=0.0)
    upper: Optional[float] = Field(default=None, gt=0.0)
    one_sided: bool = False


class ZeroMeasureSpec(_Strict):
    kind: Literal["zero"]
    dim: int = Field(default=1, ge=1)


class MixtureComponentSpec(_Strict):
    weight: float = Field(gt=0.0)
    measure: "MeasureSpec"


class MixtureSpec(_Strict):
    kind: Literal["mixture"]
    components: List[MixtureComponentSpec] = Field(min_length=1)


MeasureSpec = Annotated[
    Union[GeometricAtomsSpec, FactorialAtomsSpec, ParabolaAtomsSpec, FiniteAtomsSpec, StableSpec,
          ZeroMeasureSpec, MixtureSpec],
    Field(discriminator="kind"),
]
MixtureComponentSpec.model_rebuild()


# -- drifts -----------------------------------------------------------------

class LinearDriftSpec(_Strict):
    kind: Literal["linear"]
    matrix: List[List[float]]


class NegIdentitySpec(_Strict):
    kind: Literal["neg_identity"]
    dim: int = Field(default=1, ge=1)


class ZeroDriftSpec(_Strict):
    kind: Literal["zero"]
    dim: int = Field(default=1, ge=1)


class PolynomialDriftSpec(_Strict):
    kind: Literal["polynomial"]
    coefficients: List[float] = Field(min_length=1)


DriftSpec = Annotated[
    Union[LinearDriftSpec, NegIdentitySpec, ZeroDriftSpec, PolynomialDriftSpec],
    Field(discriminator="kind"),
]


# -- shared pieces ----------------------------------------------------------

class StretchSpec(_Strict):
    kind: Literal["indicator", "bump"] = "indicator"
    a: float = Field(default=0.0, ge=0.0)
    b: float = 1.0
    level: float = 1.0
    beta: float = Field(default=0.1, gt=0.0)

    @model_validator(mode="after")
    def _order(self):
        if self.b <= self.a:
            raise ValueError("stretch interval needs a < b")
        return self


class MarkBand(_Strict):
    """Mark set {lo <= |u| < hi}"""
    lo: float = Field(default=0.0, ge=0.0)
    hi: Optional[float] = None


class Budgets(_Strict):
    n_samples: int = Field(default=20_000, ge=1)
    n_paths: int = Field(default=8, ge=1)
    event_budget: Optional[float] = Field(default=None, gt=0.0)
    eps_cut: Optional[float] = Field(default=None, gt=0.0, le=1.0)
    step: Optional[float] = Field(default=None, gt=0.0)


# -- experiments ------------------------------------------------------------

IndexKindName = Literal["zero", "finite", "infinite"]
SupVerdict = Literal["unbounded-like", "bounded-like", "inconclusive"]


class IndicesExperiment(_Strict):
    kind: Literal["indices"]
    r_list: List[int] = Field(default_factory=lambda: [1, 2])
    apertures: List[float] = Field(default_factory=lambda: [0.5, 0.25, 0.1])
    n_eps: int = Field(default=40, ge=5)
    dir_grid: Optional[int] = Field(default=None, ge=2)
    expect: Dict[str, IndexKindName] = Field(default_factory=dict)


class WideConeExperiment(_Strict):
    kind: Literal["wide_cone"]
    varrho: float = Field(default=0.5, gt=0.0, lt=1.0)
    mass_threshold: float = Field(default=0.5, gt=0.0)
    dir_grid: Optional[int] = Field(default=None, ge=2)
    expect_holds: Optional[bool] = None


class AdmissibilityExperiment(_Strict):
    """E p = 1 and E phi(T nu) = E p phi(nu) for counting functionals on [0, box)"""
    kind: Literal["admissibility"]
    stretch: StretchSpec = StretchSpec()
    cell: MarkBand = MarkBand()
    window: float = Field(default=2.0, gt=0.0)
    box: float = Field(default=0.5, gt=0.0)
    n_se: float = Field(default=4.0, gt=0.0)


class DerivativeCheckExperiment(_Strict):
    kind: Literal["derivative_check"]
    stretch: StretchSpec = StretchSpec(kind="bump", a=0.0, b=1.0, beta=0.1)
    cell: MarkBand = MarkBand()
    eps_list: List[float] = Field(default_factory=lambda: [1e-2, 1e-3, 1e-4], min_length=2)
    scheme: Literal["central", "forward"] = "central"
    rel_tol: float = Field(default=1e-2, gt=0.0)
    expect_slope: Optional[float] = None
    slope_tol: float = Field(default=0.2, gt=0.0)


class MalliavinExperiment(_Strict):
    kind: Literal["malliavin"]
    B: float = Field(default=4.0, gt=0.0)
    gamma: float = Field(default=0.25, gt=0.0, lt=0.5)
    shape_beta: float = Field(default=0.1, gt=0.0, lt=0.5)
    eps_floor: Optional[float] = Field(default=None, gt=0.0, le=1.0)
    expect: Optional[Literal["zero", "nondegenerate"]] = None
    min_fraction: float = Field(default=0.99, ge=0.0, le=1.0)


class DensitySweepExperiment(_Strict):
    kind: Literal["density_sweep"]
    factors: List[float] = Field(default_factory=lambda: [1.0, 0.5, 0.25], min_length=2)
    expect: Dict[str, SupVerdict] = Field(default_factory=dict)


class CharProbeExperiment(_Strict):
    kind: Literal["char_probe"]
    factorial_n: List[int] = Field(default_factory=lambda: [4, 5, 6, 7])
    z_list: List[float] = Field(default_factory=list)
    coordinate: int = Field(default=0, ge=0)
    n_se: float = Field(default=4.0, gt=0.0)
    expect_increasing: bool = False


class StationaryExperiment(_Strict):
    kind: Literal["stationary"]
    burn_in: Optional[float] = Field(default=None, gt=0.0)
    factors: List[float] = Field(default_factory=lambda: [1.0, 0.5, 0.25], min_length=2)
    expect_mean: Optional[List[float]] = None
    expect_verdict: Optional[SupVerdict] = None
    n_se: float = Field(default=4.0, gt=0.0)


class RegimeExperiment(_Strict):
    kind: Literal["regime"]
    r_list: List[int] = Field(default_factory=lambda: [1])
    k_list: List[int] = Field(default_factory=lambda: [0, 1], min_length=1)
    varrho: float = Field(default=0.5, gt=0.0, lt=1.0)
    stationary: bool = False
    indices_source: Literal["estimate", "reference"] = "estimate"
    expect_regime: Optional[Literal["I", "II", "III.a", "III.b", "III.c"]] = None
    expect_band: Optional[List[float]] = Field(default=None, min_length=2, max_length=2)
    band_tol: float = Field(default=1e-4, gt=0.0)


class TvContinuityExperiment(_Strict):
    kind: Literal["tv_continuity"]
    shifts: List[float] = Field(default_factory=lambda: [0.5, 0.1, 0.02], min_length=1)


class NondegeneracyExperiment(_Strict):
    kind: Literal["nondegeneracy"]
    n_list: List[float] = Field(default_factory=lambda: [10, 100, 1e4, 1e8], min_length=2)
    tol: float = Field(default=1e-10, gt=0.0)
    r: int = Field(default=1, ge=1)
    varrho: float = Field(default=0.5, gt=0.0, lt=1.0)
    x: Optional[List[float]] = None
    expect_holds: Optional[bool] = None


ExperimentSpec = Annotated[
    Union[IndicesExperiment, WideConeExperiment, AdmissibilityExperiment, DerivativeCheckExperiment,
          MalliavinExperiment, DensitySweepExperiment, CharProbeExperiment, StationaryExperiment,
          RegimeExperiment, TvContinuityExperiment, NondegeneracyExperiment],
    Field(discriminator="kind"),
]


class ScenarioSpec(_Strict):
    id: str = Field(min_length=1)
    description: str = ""
    measure: MeasureSpec
    drift: DriftSpec
    experiment: ExperimentSpec
    horizon: float = Field(default=1.0, gt=0.0)
    t_list: List[float] = Field(default_factory=list)
    x0: Optional[List[float]] = None
    seed: Optional[int] = Field(default=None, ge=0)
    small_jumps: Literal["drop", "gaussian_match"] = "drop"
    compensate: bool = True
    budgets: Budgets = Budgets()

    @field_validator("t_list")
    @classmethod
    def _positive_times(cls, value: List[float]) -> List[float]:
        if any(t <= 0 for t in value):
            raise ValueError("times in t_list must be positive")
        return value


class RunConfig(_Strict):
    schema_version: int
    run_seed: Optional[int] = Field(default=None, ge=0)
    builtins: List[str] = Field(default_factory=list)
    scenarios: List[ScenarioSpec] = Field(default_factory=list)

    @field_validator("schema_version")
    @classmethod
    def _version(cls, value: int) -> int:
        if value != SCHEMA_VERSION:
            raise ValueError(f"schema_version must be {SCHEMA_VERSION}, got {value}")
        return value


def parse_run_config(data: Dict[str, Any]) -> RunConfig:
    try:
        return RunConfig.model_validate(data)
    except ValidationError as e:
        raise ConfigError(str(e)) from e


def parse_scenario(data: Dict[str, Any]) -> ScenarioSpec:
    try:
        return ScenarioSpec.model_validate(data)
    except ValidationError as e:
        raise ConfigError(str(e)) from e


def load_run_config(path: Union[str, Path]) -> RunConfig:
    """Read and validate a JSON run configuration"""
    try:
        with open(path, 'r') as handle:
            data = json.load(handle)
    except FileNotFoundError as e:
        raise ConfigError(f"configuration file not found: {path}") from e
    except json.JSONDecodeError as e:
        raise ConfigError(f"configuration is not valid JSON: {e}") from e
    if not isinstance(data, dict):
        raise ConfigError("configuration must be a JSON object")
    return parse_run_config(data)
