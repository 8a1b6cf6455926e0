#!/usr/bin/env python3
"""
Regime Classification
=====================

Decision table turning drift classes, order indices and the wide cone
condition into a regularity regime:

    I      absolutely continuous (wide cone condition, a in K_r)
    II     smooth stationary density (dissipative drift, wide cone condition)
    III.a  smooth for every t > 0 (rho_2r infinite)
    III.b  gradual: irregular below one threshold, smooth beyond another
    III.c  irregular for every t (theta zero)

plus the empirical probes used alongside it: total variation distances
between density estimates and the sup-density trend under bandwidth
halving.
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from config.settings import Config
from ..errors import Inconclusive, InvalidParams, LatticeMismatch
from ..measures.indices import IndexClass, IndexKind
from .density import DensityEstimate, bandwidth_ladder
from .thresholds import irregularity_thresholds, smoothness_ladder, smoothness_threshold

logger = logging.getLogger(__name__)

UNBOUNDED_SLOPE = -0.5
BOUNDED_SPREAD = 0.2


class Regime(Enum):
    ABSOLUTELY_CONTINUOUS = "I"
    STATIONARY_SMOOTH = "II"
    SMOOTH_ALL_T = "III.a"
    GRADUAL = "III.b"
    IRREGULAR = "III.c"


@dataclass
class RegimeVerdict:
    regime: Regime
    band: Optional[Tuple[Optional[float], float]] = None
    r: Optional[int] = None
    reasons: List[str] = field(default_factory=list)

    def to_dict(self) -> Dict[str, Any]:
        return {'regime': self.regime.value, 'band': None if self.band is None else list(self.band),
                'r': self.r, 'reasons': self.reasons}


def _straddles_zero(index: IndexClass) -> bool:
    return index.kind == IndexKind.FINITE and index.value - (index.uncertainty or 0.0) <= 0.0


def classify_regime(drift_pass: Mapping[int, bool], indices: Mapping[str, IndexClass], wide_cone: bool,
                    m: int = 1, k: int = 0, stationary: bool = False) -> RegimeVerdict:
    """
    Regime for a drift whose K_r certificates passed for the r in drift_pass.

    indices holds 'theta', optionally 'rho_1', and 'rho_<2r>' for every
    certified r. A finite index whose uncertainty reaches zero raises
    Inconclusive, as does a scenario matching no row of the table.
    """
    theta = indices.get('theta')
    if theta is not None:
        if _straddles_zero(theta):
            raise Inconclusive(f"theta = {theta.value:.4g} +- {theta.uncertainty:.2g} straddles zero")
        if theta.kind == IndexKind.ZERO:
            return RegimeVerdict(Regime.IRREGULAR, reasons=["theta is zero"])

    passed = sorted(int(r) for r, ok in drift_pass.items() if ok)
    if stationary and wide_cone and passed:
        return RegimeVerdict(Regime.STATIONARY_SMOOTH, r=passed[0],
                             reasons=[f"a in K_{passed[0]}", "dissipative drift", "wide cone condition"])

    for r in passed:
        rho = indices.get(f'rho_{2 * r}')
        if rho is None:
            continue
        if rho.kind == IndexKind.INFINITE:
            return RegimeVerdict(Regime.SMOOTH_ALL_T, r=r, reasons=[f"a in K_{r}", f"rho_{2 * r} infinite"])
        if rho.kind == IndexKind.FINITE:
            if _straddles_zero(rho):
                raise Inconclusive(f"rho_{2 * r} = {rho.value:.4g} +- {rho.uncertainty:.2g} straddles zero")
            upper = smoothness_threshold(k, m, r, rho)
            lower = None
            if theta is not None:
                irregular = irregularity_thresholds(theta, indices.get('rho_1'), m, k_list=(k,))
                lower = irregular.no_CBk_below.get(k)
            return RegimeVerdict(Regime.GRADUAL, (lower, upper), r,
                                 [f"a in K_{r}", f"rho_{2 * r} finite = {rho.value:.4g}"])

    if wide_cone and passed:
        return RegimeVerdict(Regime.ABSOLUTELY_CONTINUOUS, r=passed[0],
                             reasons=[f"a in K_{passed[0]}", "wide cone condition"])
    raise Inconclusive("no row of the regime table applies")


@dataclass
class RegularityReport:
    """Indices, thresholds, regime and empirical evidence for one scenario"""
    scenario_id: str
    indices: Dict[str, IndexClass]
    drift_class: Dict[int, bool]
    wide_cone: bool
    thresholds: Dict[str, Any]
    verdict: Optional[RegimeVerdict]
    empirical: Dict[str, Any] = field(default_factory=dict)
    inconclusive: Optional[str] = None

    def __post_init__(self):
        for name, value in _flatten(self.thresholds):
            if value is not None and value < 0:
                raise InvalidParams(f"threshold {name} is negative")

    @property
    def regime(self) -> Optional[str]:
        return None if self.verdict is None else self.verdict.regime.value

    def to_dict(self) -> Dict[str, Any]:
        return {
            'scenario': self.scenario_id,
            'indices': {name: index.to_dict() for name, index in self.indices.items()},
            'drift_class': {f"K_{r}": ok for r, ok in self.drift_class.items()},
            'wide_cone': self.wide_cone,
            'thresholds': self.thresholds,
            'regime': self.regime,
            'verdict': None if self.verdict is None else self.verdict.to_dict(),
            'inconclusive': self.inconclusive,
            'empirical': self.empirical,
        }


def _flatten(tree, prefix: str = ""):
    if isinstance(tree, dict):
        for key, value in tree.items():
            yield from _flatten(value, f"{prefix}{key}.")
    elif isinstance(tree, (int, float)) and not isinstance(tree, bool):
        yield prefix.rstrip('.'), float(tree)


def regularity_report(scenario_id: str, drift_pass: Mapping[int, bool], indices: Mapping[str, IndexClass],
                      wide_cone: bool, m: int = 1, k_list: Sequence[int] = (0, 1), r_list: Sequence[int] = (2,),
                      stationary: bool = False) -> RegularityReport:
    """Thresholds plus the regime for k = k_list[0]; Inconclusive is recorded, not raised"""
    thresholds: Dict[str, Any] = {}
    theta = indices.get('theta')
    if theta is not None:
        thresholds.update(irregularity_thresholds(theta, indices.get('rho_1'), m, r_list, k_list).to_dict())
    smooth = {}
    for r, ok in sorted(drift_pass.items()):
        rho = indices.get(f'rho_{2 * r}')
        if ok and rho is not None:
            smooth[f"r={r}"] = {str(k): smoothness_threshold(k, m, r, rho) for k in k_list}
    thresholds['t_smooth'] = smooth
    if m == 1 and 'rho' in indices:
        thresholds['ladder'] = {str(k): v for k, v in smoothness_ladder(indices['rho'], max(k_list)).items()}

    verdict, note = None, None
    try:
        verdict = classify_regime(drift_pass, indices, wide_cone, m, k_list[0], stationary)
    except Inconclusive as exc:
        note = str(exc)
        logger.info("Regime for %s inconclusive: %s", scenario_id, note)
    return RegularityReport(scenario_id, dict(indices), dict(drift_pass), wide_cone, thresholds, verdict,
                            inconclusive=note)


def tv_distance(est1: DensityEstimate, est2: DensityEstimate) -> float:
    """1/2 sum |p1 - p2| x cell volume on a common lattice"""
    if not est1.same_lattice(est2):
        raise LatticeMismatch("density estimates live on different lattices")
    distance = 0.5 * float(np.sum(np.abs(est1.values - est2.values) * est1.cell_volumes))
    return float(np.clip(distance, 0.0, 1.0))


def tv_noise_level(counts, n_other: Optional[int] = None, z: float = 4.0) -> float:
    """
    Bound on the total variation between two independent histograms of one
    law: the multinomial mean of 1/2 sum |p1_i - p2_i| plus z standard
    deviations, with cell probabilities estimated from counts.
    """
    counts = np.asarray(counts, dtype=float).ravel()
    n = counts.sum()
    if n <= 0:
        raise InvalidParams("counts must contain samples")
    n_other = float(n_other or n)
    p = counts / n
    sigma = np.sqrt(p * (1.0 - p) * (1.0 / n + 1.0 / n_other))
    mean = 0.5 * np.sum(sigma) * np.sqrt(2.0 / np.pi)
    spread = 0.5 * np.sqrt(np.sum(sigma ** 2 * (1.0 - 2.0 / np.pi)))
    return float(mean + z * spread)


@dataclass
class SupDensityRow:
    t: float
    bandwidths: List[float]
    maxima: List[float]
    slope: float
    verdict: str

    def to_dict(self) -> Dict[str, Any]:
        return {'t': self.t, 'bandwidths': self.bandwidths, 'max_density': self.maxima,
                'log_slope': self.slope, 'verdict': self.verdict}


def sup_density_verdict(bandwidths: Sequence[float], maxima: Sequence[float]) -> Tuple[float, str]:
    """
    Log-log slope of max density against bandwidth. A slope at or below
    UNBOUNDED_SLOPE with the maximum growing at every halving is
    unbounded-like; maxima within BOUNDED_SPREAD of each other are
    bounded-like; anything else is inconclusive. At -0.5 the maximum at
    least doubles across two halvings.
    """
    h = np.asarray(bandwidths, dtype=float)
    peak = np.asarray(maxima, dtype=float)
    if np.any(peak <= 0) or len(h) < 2:
        return float('nan'), "inconclusive"
    slope = float(np.polyfit(np.log(h), np.log(peak), 1)[0])
    order = np.argsort(-h)
    growing = bool(np.all(np.diff(peak[order]) > 0))
    if slope <= UNBOUNDED_SLOPE and growing:
        return slope, "unbounded-like"
    if peak.max() <= (1.0 + BOUNDED_SPREAD) * peak.min():
        return slope, "bounded-like"
    return slope, "inconclusive"


def sup_density_trend(samples_by_t: Mapping[float, np.ndarray],
                      factors: Optional[Sequence[float]] = None) -> List[SupDensityRow]:
    """Max-KDE along the Silverman bandwidth ladder for each time"""
    factors = tuple(factors or Config.BANDWIDTH_LADDER)
    rows = []
    for t in sorted(samples_by_t):
        estimates = bandwidth_ladder(samples_by_t[t], factors)
        bandwidths = [float(np.prod(e.bandwidth)) for e in estimates]
        maxima = [e.max_value() for e in estimates]
        slope, verdict = sup_density_verdict(bandwidths, maxima)
        logger.debug("sup-density trend at t=%g: %s (slope %.3f)", t, verdict, slope)
        rows.append(SupDensityRow(float(t), bandwidths, maxima, slope, verdict))
    return rows
