#!/usr/bin/env python3
"""
Point Measure Tests
===================

Configurations, cutoff schemes, batch sampling and the Levy path built
from a configuration.
"""

import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from core.errors import InvalidParams, RateOverflow
from core.measures import finite_atoms
from core.simulation import (CutoffScheme, PointConfiguration, SmallJumpMode, default_eps_cut, derive_seed,
                             dump_configuration, evaluate_levy_path, event_count_chisquare,
                             load_configuration, make_scheme, sample_batch, sample_configuration)
from core.simulation.marks import MarkSamplerCache


class TestPointConfiguration:

    def test_unsorted_times_rejected(self):
        with pytest.raises(InvalidParams):
            PointConfiguration((0.0, 1.0), [0.7, 0.2], [[1.0], [1.0]], 0.5, 0)

    def test_times_outside_window_rejected(self):
        with pytest.raises(InvalidParams):
            PointConfiguration((0.0, 1.0), [0.2, 1.0], [[1.0], [1.0]], 0.5, 0)

    def test_marks_below_cutoff_rejected(self):
        with pytest.raises(InvalidParams):
            PointConfiguration((0.0, 1.0), [0.2], [[0.1]], 0.5, 0)

    def test_with_times_resorts_marks(self):
        config = PointConfiguration((0.0, 1.0), [0.2, 0.7], [[1.0], [2.0]], 0.5, 0, aux=[0.1, 0.9])
        moved = config.with_times(np.array([0.9, 0.1]))
        np.testing.assert_allclose(moved.times, [0.1, 0.9])
        np.testing.assert_allclose(moved.marks[:, 0], [2.0, 1.0])
        np.testing.assert_allclose(moved.aux, [0.9, 0.1])

    def test_window_grows_to_cover_moved_times(self):
        config = PointConfiguration((0.0, 1.0), [0.5], [[1.0]], 0.5, 0)
        moved = config.with_times(np.array([1.5]))
        assert moved.window[1] > 1.5

    def test_count_in(self):
        config = PointConfiguration((0.0, 1.0), [0.1, 0.4, 0.8], [[1.0], [-2.0], [3.0]], 0.5, 0)
        assert config.count_in(0.0, 0.5) == 2
        assert config.count_in(0.0, 1.0, lambda u: u[:, 0] > 0) == 2


class TestCutoffScheme:

    def test_eps_cut_range(self):
        with pytest.raises(InvalidParams):
            CutoffScheme(0.0, [0.0])
        with pytest.raises(InvalidParams):
            CutoffScheme(1.5, [0.0])

    def test_gaussian_match_needs_covariance(self):
        with pytest.raises(InvalidParams):
            CutoffScheme(0.1, [0.0], SmallJumpMode.GAUSSIAN_MATCH)

    def test_compensator_of_geometric_atoms(self, geometric_e):
        scheme = make_scheme(geometric_e, np.exp(-3.5))
        assert scheme.compensator[0] == pytest.approx(0.553001, abs=1e-6)
        assert not np.any(make_scheme(geometric_e, np.exp(-3.5), compensate=False).compensator)

    def test_gaussian_factor_matches_covariance(self, stable_one):
        scheme = make_scheme(stable_one, 0.1, "gaussian_match")
        factor = scheme.gaussian_factor()
        np.testing.assert_allclose(factor @ factor.T, scheme.covariance, atol=1e-12)

    def test_default_cutoff(self, unit_atom, stable_one):
        assert default_eps_cut(unit_atom) == 1.0
        # 2 / eps mass beyond eps
        assert default_eps_cut(stable_one, max_rate=100.0) == pytest.approx(0.02, rel=1e-6)


class TestSampling:

    def test_poisson_event_counts(self):
        measure = finite_atoms([[1.0]], [10.0])
        batch = sample_batch(measure, (0.0, 1.0), 1.0, 10_000, seed=3)
        assert batch.counts.mean() == pytest.approx(10.0, abs=0.3)
        _, p_value = event_count_chisquare(batch.counts, 10.0)
        assert p_value > 1e-4

    def test_blocks_make_replicas_stable(self, geometric_e):
        small = sample_batch(geometric_e, (0.0, 1.0), 0.01, 16, seed=11, block_size=8)
        large = sample_batch(geometric_e, (0.0, 1.0), 0.01, 24, seed=11, block_size=8)
        np.testing.assert_array_equal(small.offsets, large.offsets[:17])
        stop = small.offsets[-1]
        np.testing.assert_array_equal(small.times, large.times[:stop])
        np.testing.assert_array_equal(small.marks, large.marks[:stop])

    def test_batch_times_sorted_per_replica(self, geometric_e):
        batch = sample_batch(geometric_e, (0.0, 2.0), 0.01, 50, seed=5)
        for i in range(batch.n_replicas):
            config = batch.configuration(i)
            assert np.all(np.diff(config.times) > 0)
            assert np.all(config.norms >= 0.01)

    def test_factorial_compensated_mean(self, factorial):
        eps = 1.0 / 24.0 * (1.0 - 1e-9)
        scheme = make_scheme(factorial, eps)
        batch = sample_batch(factorial, (0.0, 1.0), eps, 20_000, seed=17)
        values = batch.jump_sums()[:, 0] - scheme.compensator[0]
        stderr = values.std(ddof=1) / np.sqrt(values.size)
        assert abs(values.mean()) < 5 * stderr

    def test_rate_overflow(self, stable_one):
        with pytest.raises(RateOverflow):
            sample_configuration(stable_one, (0.0, 1.0), 1e-6, 0, event_budget=1e3)

    def test_same_seed_same_configuration(self, geometric_e):
        first = sample_configuration(geometric_e, (0.0, 1.0), 0.01, 9, replica=2)
        second = sample_configuration(geometric_e, (0.0, 1.0), 0.01, 9, replica=2)
        np.testing.assert_array_equal(first.times, second.times)
        np.testing.assert_array_equal(first.aux, second.aux)

    def test_dump_and_load(self, geometric_e, tmp_path):
        config = sample_configuration(geometric_e, (0.0, 3.0), 0.01, 21, replica=4)
        path = tmp_path / "config.bin"
        dump_configuration(config, path)
        loaded = load_configuration(path)
        np.testing.assert_array_equal(loaded.times, config.times)
        np.testing.assert_array_equal(loaded.marks, config.marks)
        np.testing.assert_array_equal(loaded.aux, config.aux)
        assert loaded.window == config.window

    def test_load_rejects_foreign_file(self, tmp_path):
        path = tmp_path / "junk.bin"
        path.write_bytes(b"\0" * 64)
        with pytest.raises(InvalidParams):
            load_configuration(path)


class TestLevyPath:

    def test_jumps_count_at_their_own_time(self):
        config = PointConfiguration((0.0, 1.0), [0.2, 0.7], [[1.0], [2.0]], 0.5, 0)
        scheme = CutoffScheme(0.5, [0.5])
        values = evaluate_levy_path(config, scheme, [0.1, 0.2, 1.0])
        np.testing.assert_allclose(values[:, 0], [-0.05, 0.9, 2.5])

    def test_unsorted_times_rejected(self):
        config = PointConfiguration((0.0, 1.0), [0.2], [[1.0]], 0.5, 0)
        with pytest.raises(InvalidParams):
            evaluate_levy_path(config, CutoffScheme(0.5, [0.0]), [0.5, 0.1])


class TestSeedsAndCache:

    def test_derived_seeds(self):
        assert derive_seed(7, "a") == derive_seed(7, "a")
        assert derive_seed(7, "a") != derive_seed(7, "b")
        assert 0 <= derive_seed(7, "a") < 2 ** 64

    def test_sampler_cache_hits(self, geometric_e):
        cache = MarkSamplerCache(max_size=2)
        first = cache.get(geometric_e, 0.01)
        assert cache.get(geometric_e, 0.01) is first
        stats = cache.get_stats()
        assert stats['hits'] == 1
        assert stats['misses'] == 1

    def test_sampler_cache_evicts(self, geometric_e):
        cache = MarkSamplerCache(max_size=2)
        for eps in (0.1, 0.01, 0.001):
            cache.get(geometric_e, eps)
        assert cache.get_stats()['size'] == 2
