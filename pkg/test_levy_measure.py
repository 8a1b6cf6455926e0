#!/usr/bin/env python3
"""
Levy Measure Tests
==================

Truncated moments, order index profiles and their classification, the
wide cone check and the moment conditions.
"""

import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from core.errors import InsufficientProfile, InvalidAperture, InvalidParams
from core.measures import (Cone, IndexKind, IndexProfile, Mixture, classify_index, direction_grid,
                           estimate_order_index, factorial_atoms, finite_atoms, geometric_atoms,
                           lower_index_profile, moment_checks, order_index_profile, parabola_atoms,
                           small_jump_variance_profile, stable_measure, truncated_moment, wide_cone_check,
                           zero_measure)


class TestTruncatedMoments:

    def test_geometric_atoms_direct_sum(self, geometric_e):
        eps = np.exp(-5.0)
        expected = 5 * eps ** 2 + np.exp(-12.0) / (1.0 - np.exp(-2.0))
        assert truncated_moment(geometric_e, 2, eps) == pytest.approx(expected, rel=1e-9)

    def test_atomic_moment_is_plain_sum(self):
        measure = finite_atoms([[0.5], [-0.02], [0.003]], [2.0, 1.0, 4.0])
        eps = 0.01
        expected = 2.0 * 0.01 ** 3 + 1.0 * 0.01 ** 3 + 4.0 * 0.003 ** 3
        assert truncated_moment(measure, 3, eps) == pytest.approx(expected, rel=1e-12)

    def test_stable_closed_form(self, stable_one):
        # 4 eps^(2 - alpha) / (alpha (2 - alpha)) at alpha = 1
        assert truncated_moment(stable_one, 2, 0.01) == pytest.approx(0.04, rel=1e-10)

    def test_rejects_bad_power(self, geometric_e):
        with pytest.raises(InvalidParams):
            truncated_moment(geometric_e, 0, 0.1)


class TestProfiles:

    def test_rho_2_single_eps(self, geometric_e):
        eps = np.exp(-5.0)
        profile = order_index_profile(geometric_e, 2, 0.5, [eps])
        expected = 1.0 + np.exp(-2.0) / (5.0 * (1.0 - np.exp(-2.0)))
        assert profile.values[0] == pytest.approx(expected, rel=1e-9)
        assert profile.direction_count == 2

    def test_stable_profile_value(self, stable_one):
        profile = order_index_profile(stable_one, 2, 0.5, [0.01])
        assert profile.values[0] == pytest.approx(0.04 / (1e-4 * np.log(100.0)), rel=1e-9)

    def test_lower_profile_dominates_upper(self, geometric_e):
        eps = np.geomspace(1e-2, 1e-10, 12)
        upper = order_index_profile(geometric_e, 2, 0.5, eps)
        lower = lower_index_profile(geometric_e, eps)
        assert np.all(lower.values >= upper.values - 1e-12)

    def test_profile_requires_decreasing_eps(self):
        with pytest.raises(InvalidParams):
            IndexProfile(power=1, aperture=0.5, eps=[1e-3, 1e-2], values=[1.0, 1.0], direction_count=2)

    def test_eps_outside_unit_interval(self, geometric_e):
        with pytest.raises(InvalidParams):
            order_index_profile(geometric_e, 1, 0.5, [1.5, 0.1])

    def test_variance_profile_grows_for_stable(self, stable_one):
        profile = small_jump_variance_profile(stable_one, np.geomspace(1e-2, 1e-8, 10))
        assert profile.values[-1] > profile.values[0]


class TestClassification:

    @pytest.mark.parametrize("gamma", [np.e, np.e ** 2])
    def test_geometric_index_recovered(self, gamma):
        result = estimate_order_index(geometric_atoms(gamma), 1)
        assert result.kind == IndexKind.FINITE
        assert result.value == pytest.approx(1.0 / np.log(gamma), rel=0.05)
        assert result.stable

    def test_geometric_theta(self, geometric_e):
        result = classify_index(lower_index_profile(geometric_e))
        assert result.kind == IndexKind.FINITE
        assert result.value == pytest.approx(1.0, rel=0.05)

    @pytest.mark.parametrize("r", [1, 2, 4])
    def test_factorial_indices_infinite(self, factorial, r):
        assert estimate_order_index(factorial, r).kind == IndexKind.INFINITE

    def test_stable_rho_2_infinite(self, stable_one):
        assert estimate_order_index(stable_one, 2).kind == IndexKind.INFINITE

    def test_zero_measure_index_is_zero(self):
        profile = order_index_profile(zero_measure(1), 1, 0.5, np.geomspace(1e-2, 1e-10, 10))
        assert classify_index(profile).kind == IndexKind.ZERO

    def test_short_profile_rejected(self, geometric_e):
        profile = order_index_profile(geometric_e, 1, 0.5, [1e-2, 1e-3, 1e-4])
        with pytest.raises(InsufficientProfile):
            classify_index(profile)

    def test_aperture_order_does_not_matter(self, geometric_e):
        decreasing = estimate_order_index(geometric_e, 1, apertures=[0.5, 0.25, 0.1])
        increasing = estimate_order_index(geometric_e, 1, apertures=[0.1, 0.25, 0.5])
        assert increasing.kind == decreasing.kind == IndexKind.FINITE
        assert increasing.value == pytest.approx(decreasing.value)
        assert increasing.per_aperture == decreasing.per_aperture

    def test_effective_value(self, factorial):
        assert estimate_order_index(factorial, 1).effective_value() == float('inf')


class TestWideCone:

    def test_geometric_atoms_hold(self, geometric_e):
        report = wide_cone_check(geometric_e)
        assert report.holds
        assert report.witness is None

    def test_stable_holds(self, stable_one):
        assert wide_cone_check(stable_one).holds

    def test_parabola_fails_with_witness(self):
        report = wide_cone_check(parabola_atoms(), dir_grid=64)
        assert not report.holds
        assert report.witness is not None
        assert len(report.witness) == 2
        assert report.to_dict()['witness_masses'] is not None

    def test_finite_measure_fails(self, unit_atom):
        assert not wide_cone_check(unit_atom).holds


class TestMomentsAndMasses:

    def test_geometric_moments(self, geometric_e):
        report = moment_checks(geometric_e)
        assert report.first_moment_small_jumps
        assert all(report.big_jump_pmoments.values())

    def test_stable_first_moment_diverges(self):
        assert not moment_checks(stable_measure(1.5)).first_moment_small_jumps

    def test_retained_set_is_inclusive(self, geometric_e):
        fifth_atom = geometric_e.norms[4]
        assert geometric_e.retained_mass(fifth_atom) == 5.0

    def test_compensator_sum(self, geometric_e):
        comp = geometric_e.compensator(np.exp(-3.5))
        assert comp[0] == pytest.approx(np.exp(-1.0) + np.exp(-2.0) + np.exp(-3.0), abs=1e-6)
        assert comp[0] == pytest.approx(0.553001, abs=1e-6)

    def test_stable_retained_mass(self, stable_one):
        # two half-lines with density |u|^-2
        assert stable_one.retained_mass(0.1) == pytest.approx(20.0)

    def test_annulus_and_integrability(self, geometric_e):
        assert geometric_e.annulus_mass(np.exp(-3.5), np.exp(-0.5)) == 3.0
        assert geometric_e.integrability() == pytest.approx(1.0 / (np.e ** 2 - 1.0), rel=1e-9)

    def test_small_jump_covariance(self, stable_one):
        assert stable_one.small_jump_covariance(0.1)[0, 0] == pytest.approx(0.2, rel=1e-6)

    def test_mixture_adds_components(self, geometric_e, unit_atom):
        mix = Mixture([(2.0, geometric_e), (1.0, unit_atom)])
        eps = 0.01
        expected = 2.0 * truncated_moment(geometric_e, 1, eps) + truncated_moment(unit_atom, 1, eps)
        assert truncated_moment(mix, 1, eps) == pytest.approx(expected, rel=1e-12)

    def test_mixture_dimension_mismatch(self, geometric_e):
        with pytest.raises(InvalidParams):
            Mixture([(1.0, geometric_e), (1.0, parabola_atoms())])

    def test_factorial_reference_index(self):
        assert factorial_atoms(10).reference['rho'] == float('inf')

    def test_fingerprint_distinguishes_measures(self):
        assert geometric_atoms(np.e).digest() != geometric_atoms(3.0).digest()
        assert geometric_atoms(np.e).digest() == geometric_atoms(np.e).digest()


class TestDirections:

    def test_one_dimensional_grid(self):
        np.testing.assert_array_equal(direction_grid(1), [[-1.0], [1.0]])

    def test_grid_is_unit(self):
        grid = direction_grid(3, 100)
        np.testing.assert_allclose(np.linalg.norm(grid, axis=1), 1.0)

    @pytest.mark.parametrize("aperture", [0.0, 1.0, -0.5])
    def test_invalid_aperture(self, aperture):
        with pytest.raises(InvalidAperture):
            Cone((1.0, 0.0), aperture)

    def test_cone_membership(self):
        cone = Cone.around([0.0, 2.0], 0.5)
        inside = cone.contains(np.array([[0.1, 1.0], [1.0, 0.1], [0.0, -3.0]]))
        np.testing.assert_array_equal(inside, [True, False, True])
