"""Point measure and jump SDE simulation"""

from .rng import block_stream, derive_seed, replica_stream
from .marks import AliasTable, MarkSamplerCache, build_sampler, get_sampler, sampler_cache
from .point_measure import (ConfigurationBatch, CutoffScheme, PointConfiguration, SmallJumpMode,
                            cell_mask, compensator_drift, default_eps_cut, dump_configuration,
                            evaluate_levy_path, event_count_chisquare, load_configuration,
                            make_scheme, sample_batch, sample_configuration)
from .sde import (ExponentBounds, GridDerivative, PathRecord, assert_exponent_bounds,
                  default_burn_in, derivative_process, exponent_bounds, malliavin_matrix,
                  simulate_endpoints, solve_path, stationary_sample, stochastic_exponent)

__all__ = [
    "block_stream", "derive_seed", "replica_stream",
    "AliasTable", "MarkSamplerCache", "build_sampler", "get_sampler", "sampler_cache",
    "ConfigurationBatch", "CutoffScheme", "PointConfiguration", "SmallJumpMode",
    "cell_mask", "compensator_drift", "default_eps_cut", "dump_configuration", "evaluate_levy_path",
    "event_count_chisquare", "load_configuration", "make_scheme", "sample_batch",
    "sample_configuration",
    "ExponentBounds", "GridDerivative", "PathRecord", "assert_exponent_bounds", "default_burn_in",
    "derivative_process", "exponent_bounds", "malliavin_matrix", "simulate_endpoints",
    "solve_path", "stationary_sample", "stochastic_exponent",
]
