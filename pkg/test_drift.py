#!/usr/bin/env python3
"""
Drift Tests
===========

Drift fields, the sampled K_r certificate and the non-degeneracy evidence.
"""

import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from core.drift import (delta, dissipativity_check, gradient_consistency, k_r_certificate, linear_drift,
                        linear_growth_constant, neg_identity, nondegeneracy_trend, polynomial_drift,
                        preimage_check, subspace_avoidance_check, sup_gradient_norm, zero_drift)
from core.errors import DegenerateGradientWarning, InvalidAperture, InvalidParams
from core.measures import finite_atoms, parabola_atoms


class TestFields:

    def test_linear_point_and_batch(self):
        a = linear_drift([[0.0, 1.0], [-2.0, 0.0]])
        np.testing.assert_allclose(a([1.0, 3.0]), [3.0, -2.0])
        batch = a(np.array([[1.0, 0.0], [0.0, 1.0]]))
        np.testing.assert_allclose(batch, [[0.0, -2.0], [1.0, 0.0]])
        assert a.grad([5.0, 5.0]).shape == (2, 2)

    def test_non_square_matrix_rejected(self):
        with pytest.raises(InvalidParams):
            linear_drift([[1.0, 2.0]])

    def test_neg_identity(self):
        a = neg_identity(2)
        np.testing.assert_allclose(a([1.0, -2.0]), [-1.0, 2.0])
        assert a.is_linear
        assert a.describe()['kind'] == 'neg_identity'

    def test_polynomial_gradient(self):
        a = polynomial_drift([0.0, 0.0, 0.0, 1.0])
        assert a(2.0)[0] == pytest.approx(8.0)
        assert a.grad(2.0)[0, 0] == pytest.approx(12.0)
        assert gradient_consistency(a) < 1e-5

    def test_delta(self):
        a = polynomial_drift([0.0, 0.0, 1.0])
        # (x + u)^2 - x^2 at x = 1, u = 0.5
        assert delta(a, [1.0], [0.5])[0] == pytest.approx(1.25)

    def test_growth_and_gradient_bounds(self):
        a = neg_identity(3)
        assert linear_growth_constant(a) <= 1.0
        assert sup_gradient_norm(a, np.zeros((4, 3))) == pytest.approx(1.0)


class TestKrCertificate:

    def test_cubic_passes_r3(self):
        cert = k_r_certificate(polynomial_drift([0.0, 0.0, 0.0, 1.0]), 3, 0.5, n_x=32)
        assert cert.passed
        # (x + y)^3 - x^3 >= y^3 / 4 for every x
        assert cert.D >= 0.25 - 1e-9

    def test_neg_identity_constant(self):
        cert = k_r_certificate(neg_identity(2), 1, 0.5, n_x=8, n_v=16, n_w=16)
        assert cert.passed
        assert cert.D == pytest.approx(1.0, rel=1e-6)
        assert set(cert.to_dict()) >= {'D', 'passed', 'worst_point', 'worst_witness'}

    def test_zero_drift_fails(self):
        with pytest.warns(DegenerateGradientWarning):
            cert = k_r_certificate(zero_drift(1), 1, 0.5, n_x=8)
        assert not cert.passed
        assert cert.singular_points == 8

    def test_invalid_aperture(self):
        with pytest.raises(InvalidAperture):
            k_r_certificate(neg_identity(1), 1, 1.5)


class TestNondegeneracy:

    def test_geometric_atoms_doubling(self, geometric_e, contraction):
        report = nondegeneracy_trend(contraction, geometric_e, [0.0])
        assert report.holds
        assert report.to_dict()['evidence_only']

    def test_zero_drift_sees_nothing(self, geometric_e, no_drift):
        report = nondegeneracy_trend(no_drift, geometric_e, [0.0])
        assert not report.holds
        assert np.all(report.masses == 0)

    def test_parabola_slow_growth_still_divergent(self):
        report = nondegeneracy_trend(linear_drift([[1.0, 0.0], [0.0, 2.0]]), parabola_atoms(), [0.0, 0.0])
        assert report.holds
        assert np.all(np.diff(report.masses, axis=1) > 0)
        assert np.all(report.masses[:, -1] < 2.0 ** 3 * report.masses[:, 0])

    def test_finite_measure_not_divergent(self, unit_atom, contraction):
        report = nondegeneracy_trend(contraction, unit_atom, [0.0])
        assert not report.holds
        assert not any(report.sweep.values())

    def test_tol_must_be_positive(self, geometric_e, contraction):
        with pytest.raises(InvalidParams):
            nondegeneracy_trend(contraction, geometric_e, [0.0], tol=0.0)

    def test_dissipativity(self, contraction, no_drift):
        assert dissipativity_check(contraction).holds
        assert dissipativity_check(contraction).gamma_estimate == pytest.approx(1.0)
        assert not dissipativity_check(no_drift).holds
        assert dissipativity_check(polynomial_drift([0.0, -1.0, 0.0, -1.0])).holds

    def test_preimage_of_axis_atom(self):
        measure = finite_atoms([[0.0, 1.0], [1.0, 0.0]], [1.0, 2.0])
        result = preimage_check(neg_identity(2), [0.0, 0.0], [1.0, 0.0], measure)
        assert result['orthogonal_mass'] == pytest.approx(1.0)
        assert result['retained_mass'] == pytest.approx(3.0)

    def test_parabola_preimage_empty(self):
        result = preimage_check(neg_identity(2), [0.0, 0.0], [1.0, 0.0], parabola_atoms())
        assert result['orthogonal_mass'] == 0.0

    def test_parabola_avoids_lines(self):
        result = subspace_avoidance_check(parabola_atoms())
        assert result['holds']
        assert 1 <= result['max_atoms_on_hyperplane'] <= 2
