#!/usr/bin/env python3
"""
Regularity Thresholds
=====================

Closed-form time thresholds driven by the order indices:

    smooth of class k beyond        t* = 2r c(k, m) / rho_2r
    c(k, m) = 2e/(e-1) (k m + m^2 + 2m - 2)
    one-dimensional ladder          a_k = 2e(k+1) / (rho (e-1))
    not in L_r,loc below            m (1 - 1/r) / theta
    not bounded continuous below    m / theta
    not in CB^k (m = 1) below       (k + 1) / rho_1
"""

from dataclasses import dataclass, field
from typing import Any, Dict, Optional, Sequence, Union

import numpy as np

from ..errors import InvalidParams
from ..measures.indices import IndexClass

IndexLike = Union[IndexClass, float, None]

E_FACTOR = 2.0 * np.e / (np.e - 1.0)


def _value(index: IndexLike) -> Optional[float]:
    if index is None:
        return None
    if isinstance(index, IndexClass):
        return index.effective_value()
    value = float(index)
    if value < 0 or np.isnan(value):
        raise InvalidParams(f"order indices are nonnegative, got {value}")
    return value


def c_constant(k: int, m: int) -> float:
    if k < 0 or m < 1:
        raise InvalidParams("k must be nonnegative and m positive")
    return E_FACTOR * (k * m + m * m + 2 * m - 2)


def smoothness_threshold(k: int, m: int, r: int, rho_2r: IndexLike) -> float:
    """t* = 2r c(k, m) / rho_2r; 0 for an infinite index, inf for a zero one"""
    if r < 1:
        raise InvalidParams("r must be a positive integer")
    rho = _value(rho_2r)
    if rho is None:
        raise InvalidParams("rho_2r is required")
    if np.isinf(rho):
        return 0.0
    if rho == 0:
        return float('inf')
    return 2.0 * r * c_constant(k, m) / rho


def smoothness_ladder(rho: IndexLike, k_max: int = 3) -> Dict[int, float]:
    """a_k = 2e(k+1) / (rho (e-1)) for k = 0..k_max"""
    value = _value(rho)
    if value is None:
        raise InvalidParams("rho is required")
    if np.isinf(value):
        return {k: 0.0 for k in range(k_max + 1)}
    if value == 0:
        return {k: float('inf') for k in range(k_max + 1)}
    return {k: E_FACTOR * (k + 1) / value for k in range(k_max + 1)}


@dataclass
class IrregularityThresholds:
    """Times below which the density provably lacks the named regularity"""
    no_Lr_below: Dict[int, float] = field(default_factory=dict)
    no_CB0_below: float = 0.0
    no_CBk_below: Dict[int, float] = field(default_factory=dict)
    irregular_for_all_t: bool = False

    def to_dict(self) -> Dict[str, Any]:
        return {
            'no_Lr_below': {str(r): t for r, t in self.no_Lr_below.items()},
            'no_CB0_below': self.no_CB0_below,
            'no_CBk_below': {str(k): t for k, t in self.no_CBk_below.items()},
            'irregular_for_all_t': self.irregular_for_all_t,
        }


def _ratio(numerator: float, index: float) -> float:
    if np.isinf(index):
        return 0.0
    if index == 0:
        return float('inf')
    return numerator / index


def irregularity_thresholds(theta: IndexLike, rho_1: IndexLike = None, m: int = 1,
                            r_list: Sequence[int] = (2,), k_list: Sequence[int] = (0, 1)) -> IrregularityThresholds:
    """
    no_Lr_below[r] = m(1 - 1/r)/theta, no_CB0_below = m/theta and, in one
    dimension with rho_1 given, no_CBk_below[k] = (k+1)/rho_1. A zero theta
    makes every threshold infinite.
    """
    th = _value(theta)
    if th is None:
        raise InvalidParams("theta is required")
    if any(r < 1 for r in r_list):
        raise InvalidParams("r values must be at least 1")

    out = IrregularityThresholds()
    out.irregular_for_all_t = th == 0
    out.no_Lr_below = {int(r): _ratio(m * (1.0 - 1.0 / r), th) for r in r_list}
    out.no_CB0_below = _ratio(float(m), th)
    rho = _value(rho_1)
    if rho is not None and m == 1:
        out.no_CBk_below = {int(k): _ratio(k + 1.0, rho) for k in k_list}
    elif 0 in k_list:
        out.no_CBk_below = {0: out.no_CB0_below}
    return out
