"""Time stretches, configuration transforms and differential grids"""

from .stretch import (TimeStretch, bump_stretch, gauss_legendre_rule, indicator_stretch, stretch_flow,
                      stretch_rate, tabulated_stretch, time_stretch_map)
from .transforms import (FiniteDifferenceReport, admissibility_batch, admissibility_density,
                         finite_diff_derivative, transform_batch, transform_configuration)
from .grid import (AnnulusRecord, DifferentialGrid, GridCell, annulus_index, annulus_radius, build_grid,
                   grid_transform)

__all__ = [
    "TimeStretch", "bump_stretch", "gauss_legendre_rule", "indicator_stretch", "stretch_flow",
    "stretch_rate", "tabulated_stretch", "time_stretch_map",
    "FiniteDifferenceReport", "admissibility_batch", "admissibility_density", "finite_diff_derivative",
    "transform_batch", "transform_configuration",
    "AnnulusRecord", "DifferentialGrid", "GridCell", "annulus_index", "annulus_radius", "build_grid",
    "grid_transform",
]
