#!/usr/bin/env python3
"""
Jump SDE Tests
==============

Path solving, the stochastic exponent, derivative processes and the
grid Malliavin matrix.
"""

import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from core.drift import neg_identity, polynomial_drift
from core.errors import BlowUp, InvalidParams
from core.simulation import (CutoffScheme, PointConfiguration, assert_exponent_bounds, default_burn_in,
                             derivative_process, exponent_bounds, make_scheme, malliavin_matrix, sample_batch,
                             simulate_endpoints, solve_path, stationary_sample, stochastic_exponent)
from core.variations import build_grid, bump_stretch, finite_diff_derivative

RAW = CutoffScheme(1.0, [0.0])


def _events(times, marks, eps_cut=1.0, aux=None):
    return PointConfiguration((0.0, 1.0), times, marks, eps_cut, 0, aux=aux)


class TestSolvePath:

    def test_single_jump_closed_form(self, contraction):
        path = solve_path(contraction, _events([0.4], [[1.0]]), RAW, [2.0])
        expected = 2.0 * np.exp(-1.0) + np.exp(-0.6)
        assert path.final_state[0] == pytest.approx(expected, abs=1e-9)

    def test_states_are_right_continuous(self, contraction):
        path = solve_path(contraction, _events([0.4], [[1.0]]), RAW, [2.0])
        assert path.state_at(0.4)[0] == pytest.approx(2.0 * np.exp(-0.4) + 1.0, abs=1e-9)
        assert path.pre_jump[0, 0] == pytest.approx(2.0 * np.exp(-0.4), abs=1e-9)
        np.testing.assert_allclose(path.states[path.event_slots] - path.pre_jump, [[1.0]], atol=1e-12)

    def test_compensator_enters_the_drift(self, no_drift):
        path = solve_path(no_drift, _events([], np.zeros((0, 1))), CutoffScheme(1.0, [0.5]), [0.0])
        assert path.final_state[0] == pytest.approx(-0.5, abs=1e-12)

    def test_gaussian_scheme_refused(self, contraction, stable_one):
        scheme = make_scheme(stable_one, 0.5, "gaussian_match")
        with pytest.raises(InvalidParams):
            solve_path(contraction, _events([], np.zeros((0, 1)), 0.5), scheme, [0.0])

    def test_bad_start_point(self, contraction):
        with pytest.raises(InvalidParams):
            solve_path(contraction, _events([], np.zeros((0, 1))), RAW, [0.0, 1.0])

    def test_blow_up(self):
        with pytest.raises(BlowUp):
            solve_path(polynomial_drift([0.0, 0.0, 1.0]), _events([], np.zeros((0, 1))), RAW, [2.0])

    def test_export_csv(self, contraction, tmp_path):
        path = solve_path(contraction, _events([0.4], [[1.0]]), RAW, [2.0], step=0.1)
        target = tmp_path / "path.csv"
        path.export_csv(target)
        lines = target.read_text().splitlines()
        assert lines[0] == "t,X1,jump"
        assert len(lines) == len(path.times) + 1
        assert sum(int(line.rsplit(",", 1)[1]) for line in lines[1:]) == 1


class TestStochasticExponent:

    def test_linear_exponent(self):
        a = neg_identity(2)
        config = PointConfiguration((0.0, 1.0), [], np.zeros((0, 2)), 1.0, 0)
        path = stochastic_exponent(solve_path(a, config, CutoffScheme(1.0, [0.0, 0.0]), [1.0, 1.0]), a)
        np.testing.assert_allclose(path.exponent[-1], np.exp(-1.0) * np.eye(2), atol=1e-8)
        np.testing.assert_allclose(path.exponent_inverse[-1], np.e * np.eye(2), atol=1e-7)
        assert path.metadata['exponent_defect'] < 1e-10

    def test_bounds_hold_for_nonlinear_drift(self):
        a = polynomial_drift([0.0, -1.0, 0.0, -1.0])
        path = solve_path(a, _events([0.2, 0.6], [[1.0], [-1.0]]), RAW, [0.5])
        bounds = assert_exponent_bounds(path, a)
        assert bounds.holds
        assert bounds.gradient_bound >= 1.0

    def test_bounds_for_contraction(self, contraction):
        bounds = exponent_bounds(solve_path(contraction, _events([0.5], [[1.0]]), RAW, [0.0]), contraction)
        assert bounds.holds
        assert bounds.min_det_margin == pytest.approx(1.0, abs=1e-8)


class TestDerivativeProcess:

    def test_matches_closed_form(self, contraction):
        stretch = bump_stretch(0.0, 1.0, 0.1)
        path = solve_path(contraction, _events([0.3, 0.7], [[1.0], [1.0]]), RAW, [0.0])
        Y = derivative_process(path, contraction, stretch)
        assert Y[0] == pytest.approx(-(np.exp(-0.7) + np.exp(-0.3)), rel=1e-8)

    def test_matches_difference_quotients(self, contraction):
        stretch = bump_stretch(0.0, 1.0, 0.1)
        config = _events([0.3, 0.7], [[1.0], [1.0]])
        Y = derivative_process(solve_path(contraction, config, RAW, [0.0]), contraction, stretch)

        def endpoint(c):
            return solve_path(contraction, c, RAW, [0.0], t_end=1.0).final_state

        report = finite_diff_derivative(endpoint, config, stretch, reference=Y)
        np.testing.assert_allclose(report.extrapolated, Y, rtol=1e-6)

    def test_forward_scheme_is_first_order(self, contraction):
        stretch = bump_stretch(0.0, 1.0, 0.1)
        config = _events([0.3, 0.7], [[1.0], [1.0]])
        Y = derivative_process(solve_path(contraction, config, RAW, [0.0]), contraction, stretch)

        def endpoint(c):
            return solve_path(contraction, c, RAW, [0.0], t_end=1.0).final_state

        report = finite_diff_derivative(endpoint, config, stretch, scheme="forward", reference=Y)
        assert report.error_slope == pytest.approx(1.0, abs=0.1)

    def test_cell_restriction(self, contraction):
        stretch = bump_stretch(0.0, 1.0, 0.1)
        path = solve_path(contraction, _events([0.3, 0.7], [[1.0], [-1.0]]), RAW, [0.0])
        Y = derivative_process(path, contraction, stretch, cell=lambda u: u[:, 0] > 0)
        assert Y[0] == pytest.approx(-np.exp(-0.7), rel=1e-8)

    def test_zero_drift_has_no_derivative(self, no_drift):
        path = solve_path(no_drift, _events([0.3], [[1.0]]), RAW, [0.0])
        np.testing.assert_array_equal(derivative_process(path, no_drift, bump_stretch(0.0, 1.0, 0.1)), [0.0])


class TestMalliavinMatrix:

    @pytest.fixture
    def grid(self, geometric_e):
        return build_grid(geometric_e, 1.0)

    @pytest.fixture
    def one_event(self):
        return _events([0.5], [[np.exp(-1.0)]], eps_cut=0.3, aux=[0.3])

    def test_single_event_gram(self, contraction, grid, one_event):
        path = solve_path(contraction, one_event, CutoffScheme(0.3, [0.0]), [0.0])
        result = malliavin_matrix(path, contraction, grid)
        assert result.sigma[0, 0] == pytest.approx(np.exp(-3.0), rel=1e-8)
        assert result.nondegenerate
        assert result.cell_ids.size == 1

    def test_zero_drift_is_degenerate(self, no_drift, grid, one_event):
        path = solve_path(no_drift, one_event, CutoffScheme(0.3, [0.0]), [0.0])
        result = malliavin_matrix(path, no_drift, grid)
        assert np.all(result.sigma == 0.0)
        assert not result.nondegenerate

    def test_refinement_keeps_single_event_gram(self, contraction, grid, one_event):
        path = solve_path(contraction, one_event, CutoffScheme(0.3, [0.0]), [0.0])
        coarse = malliavin_matrix(path, contraction, grid)
        fine = malliavin_matrix(path, contraction, grid.refined(2))
        np.testing.assert_allclose(fine.sigma, coarse.sigma, rtol=1e-12)

    def test_events_outside_the_grid(self, contraction, grid):
        config = _events([0.5], [[2.0]], eps_cut=0.3)
        path = solve_path(contraction, config, CutoffScheme(0.3, [0.0]), [0.0])
        result = malliavin_matrix(path, contraction, grid)
        assert result.lambda_min == 0.0
        assert result.to_dict()['occupied_cells'] == 0


class TestEndpoints:

    def test_linear_closed_form_matches_paths(self, contraction, unit_atom):
        endpoints = simulate_endpoints(contraction, unit_atom, RAW, [1.0], 1.0, 6, seed=4)
        batch = sample_batch(unit_atom, (0.0, 1.0), 1.0, 6, seed=4)
        for i in range(6):
            path = solve_path(contraction, batch.configuration(i), RAW, [1.0])
            assert endpoints[i, 0] == pytest.approx(path.final_state[0], abs=1e-9)

    def test_nonlinear_batch_matches_paths(self, unit_atom):
        a = polynomial_drift([0.0, -1.0, 0.0, -1.0])
        endpoints = simulate_endpoints(a, unit_atom, RAW, [0.5], 1.0, 6, seed=8)
        batch = sample_batch(unit_atom, (0.0, 1.0), 1.0, 6, seed=8)
        for i in range(6):
            path = solve_path(a, batch.configuration(i), RAW, [0.5])
            assert endpoints[i, 0] == pytest.approx(path.final_state[0], abs=1e-8)

    def test_horizon_must_be_positive(self, contraction, unit_atom):
        with pytest.raises(InvalidParams):
            simulate_endpoints(contraction, unit_atom, RAW, [0.0], 0.0, 4, seed=1)

    def test_burn_in(self, contraction):
        assert default_burn_in(contraction) == pytest.approx(20.0)

    def test_stationary_mean(self, contraction, unit_atom):
        # OU driven by unit jumps at rate 1: stationary mean 1, variance 1/2
        samples = stationary_sample(contraction, unit_atom, RAW, n_samples=4000, seed=2)
        assert samples.mean() == pytest.approx(1.0, abs=0.06)
        assert samples.var() == pytest.approx(0.5, abs=0.06)
