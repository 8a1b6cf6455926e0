#!/usr/bin/env python3
"""
Time Stretch Tests
==================

Stretch maps and their rates, configuration transforms, the admissibility
density and differential grids.
"""

import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from core.errors import InvalidParams
from core.measures import finite_atoms
from core.simulation import PointConfiguration, sample_batch
from core.variations import (admissibility_batch, admissibility_density, annulus_index, annulus_radius,
                             build_grid, bump_stretch, grid_transform, indicator_stretch, stretch_rate,
                             tabulated_stretch, time_stretch_map, transform_batch, transform_configuration)


class TestStretchMaps:

    def test_indicator_forward_map(self):
        # z' = min(z, 1): exponential growth up to 1, then unit speed
        value = time_stretch_map(indicator_stretch(0.0, 1.0), 1.0, 0.5)
        assert float(value) == pytest.approx(2.0 - np.log(2.0), abs=1e-6)

    def test_indicator_backward_map(self):
        assert float(time_stretch_map(indicator_stretch(0.0, 1.0), -1.0, 0.5)) == pytest.approx(0.5 / np.e, abs=1e-6)

    def test_group_law(self):
        stretch = bump_stretch(0.0, 1.0, 0.2)
        x = np.linspace(0.0, 1.2, 13)
        composed = time_stretch_map(stretch, 0.3, time_stretch_map(stretch, 0.7, x))
        np.testing.assert_allclose(composed, time_stretch_map(stretch, 1.0, x), atol=1e-6)

    def test_inverse(self):
        stretch = indicator_stretch(0.0, 1.0)
        x = np.array([0.1, 0.5, 0.9, 1.5])
        np.testing.assert_allclose(time_stretch_map(stretch, -1.0, time_stretch_map(stretch, 1.0, x)), x, atol=1e-6)

    def test_bump_keeps_its_interval(self):
        stretch = bump_stretch(0.2, 0.8, 0.1)
        x = np.array([0.0, 0.1, 0.25, 0.5, 0.75, 0.9])
        moved = time_stretch_map(stretch, 2.0, x)
        np.testing.assert_array_equal(moved[[0, 1, 5]], x[[0, 1, 5]])
        assert np.all((moved[2:5] > 0.2) & (moved[2:5] < 0.8))

    def test_constants(self):
        assert indicator_stretch(0.0, 2.0, level=0.5).c_inf() == pytest.approx(1.0)
        assert bump_stretch(0.0, 1.0, 0.1).c_inf(3.0) == 0.0
        assert bump_stretch(0.0, 1.0, 0.1).compactly_vanishing

    def test_grid_compatibility(self):
        assert bump_stretch(0.0, 1.0, 0.1).grid_compatible((0.0, 1.0))
        assert not indicator_stretch(0.0, 1.0).grid_compatible((0.0, 1.0))

    def test_invalid_stretches(self):
        with pytest.raises(InvalidParams):
            indicator_stretch(1.0, 0.5)
        with pytest.raises(InvalidParams):
            bump_stretch(0.0, 1.0, 0.6)

    def test_tabulated_matches_indicator(self):
        table = tabulated_stretch(lambda t: np.ones_like(t), (0.0, 1.0))
        assert table.total == pytest.approx(1.0)
        assert float(table.J(0.4)) == pytest.approx(0.4, abs=1e-9)


class TestStretchRate:

    def test_indicator_rate(self):
        assert stretch_rate(indicator_stretch(0.0, 1.0), 0.5)[0] == pytest.approx(np.log(2.0), abs=1e-6)

    def test_rate_is_log_derivative(self):
        stretch = bump_stretch(0.0, 1.0, 0.3)
        t, dt = 0.35, 1e-6
        slope = (time_stretch_map(stretch, 0.8, t + dt) - time_stretch_map(stretch, 0.8, t - dt)) / (2 * dt)
        assert stretch_rate(stretch, t, 0.8)[0] == pytest.approx(np.log(float(slope)), abs=1e-5)

    def test_quadrature_agrees_for_smooth_stretch(self):
        stretch = bump_stretch(0.0, 1.0, 0.3)
        t = np.array([0.05, 0.2, 0.5, 0.8])
        np.testing.assert_allclose(stretch_rate(stretch, t, 0.8, method="quadrature"),
                                   stretch_rate(stretch, t, 0.8), atol=1e-6)

    def test_unknown_method(self):
        with pytest.raises(InvalidParams):
            stretch_rate(indicator_stretch(), 0.5, method="simpson")


class TestTransforms:

    def test_events_in_cell_move_back(self):
        config = PointConfiguration((0.0, 2.0), [0.5, 1.5], [[1.0], [-1.0]], 0.5, 0)
        moved = transform_configuration(config, indicator_stretch(0.0, 1.0), cell=lambda u: u[:, 0] > 0)
        np.testing.assert_allclose(moved.times, [0.5 / np.e, 1.5], atol=1e-6)

    def test_zero_scale_is_identity(self):
        config = PointConfiguration((0.0, 1.0), [0.5], [[1.0]], 0.5, 0)
        assert transform_configuration(config, indicator_stretch(), scale=0.0) is config

    def test_batch_transform_matches_single(self, geometric_e):
        stretch = bump_stretch(0.0, 1.0, 0.1)
        batch = sample_batch(geometric_e, (0.0, 1.0), 0.01, 20, seed=6)
        moved = transform_batch(batch, stretch, scale=0.4)
        for i in (0, 7, 19):
            single = transform_configuration(batch.configuration(i), stretch, scale=0.4)
            np.testing.assert_allclose(moved.configuration(i).times, single.times, atol=1e-12)

    def test_admissibility_of_empty_configuration(self):
        config = PointConfiguration((0.0, 2.0), [], np.zeros((0, 1)), 0.5, 0)
        # exp(-c_inf * Pi(cell))
        assert admissibility_density(config, indicator_stretch(0.0, 1.0), None, 2.0) == pytest.approx(np.exp(-2.0))

    def test_admissibility_rejects_infinite_mass(self):
        config = PointConfiguration((0.0, 1.0), [], np.zeros((0, 1)), 0.5, 0)
        with pytest.raises(InvalidParams):
            admissibility_density(config, indicator_stretch(), None, np.inf)

    def test_admissibility_has_unit_mean(self, unit_atom):
        batch = sample_batch(unit_atom, (0.0, 2.0), 1.0, 20_000, seed=13)
        p = admissibility_batch(batch, indicator_stretch(0.0, 1.0), None, 1.0)
        stderr = p.std(ddof=1) / np.sqrt(p.size)
        assert abs(p.mean() - 1.0) < 4 * stderr


class TestGrid:

    @pytest.fixture
    def grid(self, geometric_e):
        return build_grid(geometric_e, 1.0)

    def test_annulus_indices(self):
        np.testing.assert_array_equal(annulus_index(np.array([0.5, 1.0, 0.3, np.exp(-1.0)])), [0, -1, 2, 1])
        np.testing.assert_allclose(annulus_radius(np.array([0, 1, -1])), [1.0, 0.5, 1.5])

    def test_sub_cell_counts(self, grid):
        assert [r.n for r in grid.annuli] == [1, 6, 19]
        assert [r.k for r in grid.annuli] == [13, 385, 3145729]
        assert [r.k_formula for r in grid.annuli] == [8, 194, 1572866]
        assert all(r.enlarged for r in grid.annuli)
        assert grid.empty_k == 6

    @pytest.mark.parametrize("mass, expected", [(3.0, 20), (6.0, 38)])
    def test_displayed_count_linear_in_mass(self, mass, expected):
        grid = build_grid(finite_atoms([[np.exp(-1.0)]], [mass]), 1.0)
        record = grid.annuli[0]
        assert record.n == 1
        assert record.k_formula == expected
        assert record.k >= record.k_formula

    def test_property_checks(self, grid):
        checks = grid.property_checks()
        assert checks['k_exceeds_B']
        assert checks['rate_below_half']
        assert checks['square_bound']
        assert checks['summed_below_gamma']

    def test_cells_disjoint_and_compatible(self, grid):
        assert grid.cells_disjoint()
        assert grid.stretches_compatible()
        small = build_grid(finite_atoms([[np.exp(-1.0)]], [1.0]), 1.0)
        assert small.n_cells == 13
        assert small.cells_disjoint()

    def test_refined(self, grid):
        fine = grid.refined(2)
        assert fine.n_cells == 2 * grid.n_cells

    def test_cell_lookup(self, grid):
        assert grid.cell(0).sub_cells == 13
        with pytest.raises(IndexError):
            grid.cell(grid.n_cells)

    def test_locate(self, grid):
        cells = grid.locate(np.array([0.5, 0.5, 1.5]), np.array([[np.exp(-1.0)], [np.exp(-2.0)], [np.exp(-1.0)]]),
                            np.array([0.3, 0.0, 0.3]))
        np.testing.assert_array_equal(cells, [3, 13, -1])

    def test_transforms_commute(self, grid):
        config = PointConfiguration((0.0, 1.0), [0.4, 0.6], [[np.exp(-1.0)], [np.exp(-2.0)]], 0.1, 0,
                                    aux=[0.5, 0.5])
        first, second = (int(c) for c in grid.locate(config.times, config.marks, config.aux))
        one_by_one = grid_transform(grid_transform(config, grid, {first: 0.3}), grid, {second: 0.2})
        other_order = grid_transform(grid_transform(config, grid, {second: 0.2}), grid, {first: 0.3})
        together = grid_transform(config, grid, {first: 0.3, second: 0.2})
        np.testing.assert_allclose(one_by_one.times, together.times, atol=1e-12)
        np.testing.assert_allclose(other_order.times, together.times, atol=1e-12)

    def test_invalid_parameters(self, geometric_e):
        with pytest.raises(InvalidParams):
            build_grid(geometric_e, 1.0, gamma=0.5)
        with pytest.raises(InvalidParams):
            build_grid(geometric_e, -1.0)

    def test_serialization(self, grid):
        info = grid.to_dict()
        assert info['n_cells'] == grid.n_cells
        assert info['empty_annulus_K'] == 6
        assert info['annuli'][0]['K'] == 13
