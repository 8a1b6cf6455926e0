#!/usr/bin/env python3
"""
Diagnostics Tests
=================

Density estimates, characteristic function probes, regularity thresholds
and the regime decision table.
"""

import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from core.diagnostics import (DensityKind, Regime, analytic_char_modulus, c_constant, char_function_probe,
                              classify_regime, common_lattice, density_estimate, factorial_frequencies,
                              irregularity_thresholds, regularity_report, smoothness_ladder, smoothness_threshold,
                              sup_density_trend, sup_density_verdict, tv_distance, tv_noise_level)
from core.diagnostics.regime import UNBOUNDED_SLOPE
from core.errors import Inconclusive, InvalidParams, LatticeMismatch, TooFewSamples
from core.measures import IndexKind
from core.measures.indices import IndexClass
from core.simulation import sample_batch

INFINITE = IndexClass(IndexKind.INFINITE)
ZERO = IndexClass(IndexKind.ZERO)


def finite(value, uncertainty=0.01):
    return IndexClass(IndexKind.FINITE, value, uncertainty)


class TestThresholds:

    def test_c_constants(self):
        assert c_constant(0, 1) == pytest.approx(3.16395, abs=1e-5)
        assert c_constant(1, 1) == pytest.approx(6.32790, abs=1e-5)
        with pytest.raises(InvalidParams):
            c_constant(-1, 1)

    def test_smoothness_threshold(self):
        assert smoothness_threshold(0, 1, 1, 1.0) == pytest.approx(2 * 3.16395, abs=1e-4)
        assert smoothness_threshold(0, 1, 1, INFINITE) == 0.0
        assert smoothness_threshold(0, 1, 1, ZERO) == float('inf')

    def test_ladder(self):
        ladder = smoothness_ladder(1.0, k_max=1)
        assert ladder[0] == pytest.approx(3.16395, abs=1e-5)
        assert ladder[1] == pytest.approx(6.32790, abs=1e-5)

    def test_irregularity(self):
        out = irregularity_thresholds(1.0, rho_1=1.0)
        assert out.no_Lr_below[2] == pytest.approx(0.5)
        assert out.no_CB0_below == pytest.approx(1.0)
        assert out.no_CBk_below == {0: 1.0, 1: 2.0}
        assert not out.irregular_for_all_t

    def test_zero_theta(self):
        out = irregularity_thresholds(ZERO)
        assert out.irregular_for_all_t
        assert out.no_CB0_below == float('inf')

    def test_negative_index_rejected(self):
        with pytest.raises(InvalidParams):
            smoothness_threshold(0, 1, 1, -1.0)


class TestRegimeTable:

    def test_zero_theta_is_irregular(self):
        assert classify_regime({1: True}, {'theta': ZERO}, True).regime == Regime.IRREGULAR

    def test_stationary(self):
        verdict = classify_regime({1: True}, {'theta': finite(1.0)}, True, stationary=True)
        assert verdict.regime == Regime.STATIONARY_SMOOTH

    def test_stationary_needs_certified_drift(self):
        with pytest.raises(Inconclusive):
            classify_regime({1: False}, {'theta': finite(1.0)}, True, stationary=True)

    def test_infinite_index_smooth_for_all_t(self):
        verdict = classify_regime({1: True}, {'theta': INFINITE, 'rho_2': INFINITE}, False)
        assert verdict.regime == Regime.SMOOTH_ALL_T
        assert verdict.r == 1

    def test_gradual_band(self):
        indices = {'theta': finite(1.0), 'rho_1': finite(1.0), 'rho_2': finite(1.0)}
        verdict = classify_regime({1: True}, indices, True)
        assert verdict.regime == Regime.GRADUAL
        lower, upper = verdict.band
        assert lower == pytest.approx(1.0)
        assert upper == pytest.approx(2 * 3.16395, abs=1e-4)

    def test_absolutely_continuous(self):
        assert classify_regime({1: True}, {}, True).regime == Regime.ABSOLUTELY_CONTINUOUS

    def test_no_row_applies(self):
        with pytest.raises(Inconclusive):
            classify_regime({1: False}, {}, False)

    def test_straddling_index(self):
        with pytest.raises(Inconclusive):
            classify_regime({1: True}, {'theta': finite(0.01, uncertainty=0.05)}, True)

    def test_report_records_inconclusive(self):
        report = regularity_report("probe", {1: False}, {'theta': finite(1.0)}, False)
        assert report.verdict is None
        assert report.inconclusive
        assert report.to_dict()['thresholds']['no_CB0_below'] == pytest.approx(1.0)

    def test_report_ladder(self):
        report = regularity_report("probe", {1: True}, {'theta': finite(1.0), 'rho': finite(1.0),
                                                        'rho_2': finite(1.0)}, True)
        assert report.regime == "III.b"
        assert report.thresholds['ladder']['0'] == pytest.approx(3.16395, abs=1e-5)


class TestDensity:

    def test_gaussian_kde_peak(self, rng):
        samples = rng.standard_normal(20_000)
        estimate = density_estimate(samples)
        assert estimate.method == "exact"
        assert estimate.value_at(0.0) == pytest.approx(1.0 / np.sqrt(2 * np.pi), abs=0.025)
        assert estimate.integral() == pytest.approx(1.0, abs=1e-2)

    def test_binned_agrees_with_exact(self, rng):
        samples = rng.standard_normal(5000)
        exact = density_estimate(samples, method="exact")
        binned = density_estimate(samples, method="binned")
        assert binned.max_value() == pytest.approx(exact.max_value(), rel=0.05)

    def test_histogram_integrates_to_coverage(self, rng):
        estimate = density_estimate(rng.uniform(size=1000), kind=DensityKind.HISTOGRAM, bins=20)
        assert estimate.integral() == pytest.approx(1.0)
        assert estimate.coverage == 1.0

    def test_too_few_samples(self, rng):
        with pytest.raises(TooFewSamples):
            density_estimate(rng.standard_normal(50))

    def test_tv_between_shifted_gaussians(self, rng):
        x, y = rng.standard_normal(20_000), rng.standard_normal(20_000) + 3.0
        lattice = common_lattice(x, y, cells=100)
        p = density_estimate(x, DensityKind.HISTOGRAM, lattice=lattice)
        q = density_estimate(y, DensityKind.HISTOGRAM, lattice=lattice)
        # 2 Phi(1.5) - 1
        assert tv_distance(p, q) == pytest.approx(0.8664, abs=0.05)
        assert tv_distance(p, p) == 0.0

    def test_tv_needs_common_lattice(self, rng):
        p = density_estimate(rng.standard_normal(500), DensityKind.HISTOGRAM)
        q = density_estimate(rng.standard_normal(500) + 1.0, DensityKind.HISTOGRAM)
        with pytest.raises(LatticeMismatch):
            tv_distance(p, q)

    def test_tv_noise_level_covers_same_law(self, rng):
        x, y = rng.standard_normal(5000), rng.standard_normal(5000)
        lattice = common_lattice(x, y, cells=64)
        p = density_estimate(x, DensityKind.HISTOGRAM, lattice=lattice)
        q = density_estimate(y, DensityKind.HISTOGRAM, lattice=lattice)
        counts = p.values * p.n_samples * p.cell_volumes
        assert tv_distance(p, q) <= tv_noise_level(counts, q.n_samples)


class TestSupDensity:

    def test_growing_maxima_unbounded(self):
        slope, verdict = sup_density_verdict([1.0, 0.5, 0.25], [1.0, 1.5, 2.25])
        assert slope == pytest.approx(np.log(1.5) / np.log(0.5))
        assert verdict == "unbounded-like"

    def test_slow_growth_not_unbounded(self):
        slope, verdict = sup_density_verdict([1.0, 0.5, 0.25], [1.0, 1.2, 1.45])
        assert slope > UNBOUNDED_SLOPE
        assert verdict != "unbounded-like"

    def test_doubling_over_two_halvings_unbounded(self):
        assert sup_density_verdict([1.0, 0.5, 0.25], [1.0, 1.45, 2.1])[1] == "unbounded-like"

    def test_flat_maxima_bounded(self):
        assert sup_density_verdict([1.0, 0.5, 0.25], [1.0, 1.05, 1.1])[1] == "bounded-like"

    def test_mixed_maxima_inconclusive(self):
        assert sup_density_verdict([1.0, 0.5, 0.25], [1.0, 2.0, 1.0])[1] == "inconclusive"
        assert sup_density_verdict([1.0, 0.5], [0.0, 1.0])[1] == "inconclusive"

    def test_singular_density_trend(self, rng):
        # density x^(-3/4) / 4 on (0, 1)
        rows = sup_density_trend({1.0: rng.uniform(size=20_000) ** 4})
        assert rows[0].verdict == "unbounded-like"

    def test_gaussian_trend_not_unbounded(self, rng):
        rows = sup_density_trend({0.5: rng.standard_normal(20_000)})
        assert rows[0].verdict != "unbounded-like"
        assert rows[0].bandwidths == sorted(rows[0].bandwidths, reverse=True)


class TestCharacteristicFunction:

    def test_origin_has_unit_modulus(self, rng):
        probe = char_function_probe(rng.standard_normal(1000), [0.0, 1.0])
        assert probe.modulus[0] == pytest.approx(1.0)
        assert probe.modulus[1] == pytest.approx(np.exp(-0.5), abs=4 * probe.standard_error)

    def test_poisson_modulus(self, unit_atom):
        counts = sample_batch(unit_atom, (0.0, 1.0), 1.0, 20_000, seed=19).counts.astype(float)
        probe = char_function_probe(counts, [np.pi, 0.5 * np.pi])
        probe.analytic = analytic_char_modulus(unit_atom, [np.pi, 0.5 * np.pi], 1.0)
        assert probe.analytic[0] == pytest.approx(np.exp(-2.0))
        assert np.all(probe.within(4.0))

    def test_stable_modulus(self, stable_one):
        # int (cos(zu) - 1) |u|^-2 du = -pi |z|
        assert analytic_char_modulus(stable_one, [1.0], 1.0)[0] == pytest.approx(np.exp(-np.pi), rel=1e-3)

    def test_factorial_frequencies(self):
        np.testing.assert_allclose(factorial_frequencies([0, 1, 3]), 2 * np.pi * np.array([1.0, 1.0, 6.0]))
        with pytest.raises(InvalidParams):
            factorial_frequencies([9])
        with pytest.raises(InvalidParams):
            factorial_frequencies([-1])

    def test_probe_rows(self, rng):
        probe = char_function_probe(rng.standard_normal(200), [0.0, 2.0], labels=["origin", "two"])
        rows = probe.rows()
        assert [r['label'] for r in rows] == ["origin", "two"]
        with pytest.raises(InvalidParams):
            probe.within()
