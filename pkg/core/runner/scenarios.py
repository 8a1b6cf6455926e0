#!/usr/bin/env python3
"""
Builtin Scenarios
=================

Named scenario bundles runnable without a configuration file. A builtin id
expands to one or more scenarios whose ids are '<builtin>/<experiment>'.

    example-2.1        parabola atoms in 2D: factorial-frequency singularity
                       of the first coordinate, wide cone condition fails
    example-2.2        geometric atoms (gamma = e) with a -x drift: gradual
                       regime with band [1, 6.3279]
    example-2.3        atoms n at 1/n!: singular noise, every index infinite
    stable-alpha       alpha = 1 stable noise with a -x drift: smooth for all t
    ou-jump            -x drift with unit jumps at rate one, uncompensated
    stationary-smooth  dissipative drift with a wide cone measure
"""

from typing import Any, Dict, List

from ..errors import ConfigError
from .schema import ScenarioSpec, parse_scenario

_GEOMETRIC_E = {"kind": "geometric", "gamma": 2.718281828459045}
_STATIONARY_STABLE = {"kind": "stable", "alpha": 1.5, "upper": 10.0}


def _example_2_1() -> List[Dict[str, Any]]:
    measure = {"kind": "parabola", "n_max": 20}
    drift = {"kind": "zero", "dim": 2}
    return [
        {
            "id": "example-2.1/char-probe",
            "description": "first coordinate of U_1 keeps |phi(2 pi N!)| away from zero",
            "measure": measure, "drift": drift,
            "experiment": {"kind": "char_probe", "factorial_n": [3, 4, 5, 6], "coordinate": 0,
                           "expect_increasing": True},
        },
        {
            "id": "example-2.1/wide-cone",
            "description": "atoms hug the parabola, cones around the vertical axis stay finite",
            "measure": measure, "drift": drift,
            "experiment": {"kind": "wide_cone", "varrho": 0.5, "expect_holds": False},
        },
        {
            "id": "example-2.1/subspaces",
            "description": "no line through the origin carries more than two atoms",
            "measure": measure, "drift": {"kind": "neg_identity", "dim": 2},
            "experiment": {"kind": "nondegeneracy", "n_list": [10, 100, 1e4, 1e8], "x": [0.0, 0.0],
                           "expect_holds": True},
        },
    ]


def _example_2_2() -> List[Dict[str, Any]]:
    drift = {"kind": "neg_identity", "dim": 1}
    return [
        {
            "id": "example-2.2/regime",
            "description": "gradual regime: not CB^0 before t = 1, smooth beyond t = 6.3279",
            "measure": _GEOMETRIC_E, "drift": drift,
            "experiment": {"kind": "regime", "r_list": [1], "k_list": [0, 1], "indices_source": "reference",
                           "expect_regime": "III.b", "expect_band": [1.0, 6.3279]},
        },
        {
            "id": "example-2.2/indices",
            "description": "every order index equals 1 / ln gamma",
            "measure": _GEOMETRIC_E, "drift": drift,
            "experiment": {"kind": "indices", "r_list": [1, 2],
                           "expect": {"theta": "finite", "rho_1": "finite", "rho_2": "finite"}},
        },
        {
            "id": "example-2.2/sup-density",
            "description": "max-KDE under bandwidth halving at an early and a late time",
            "measure": _GEOMETRIC_E, "drift": drift,
            "t_list": [0.5, 8.0],
            "experiment": {"kind": "density_sweep", "factors": [1.0, 0.5, 0.25],
                           "expect": {"0.5": "unbounded-like", "8.0": "bounded-like"}},
            "budgets": {"n_samples": 50_000, "eps_cut": 1e-7},
        },
        {
            "id": "example-2.2/malliavin",
            "description": "Malliavin matrix of the differential grid is positive on every occupied path",
            "measure": _GEOMETRIC_E, "drift": drift,
            "experiment": {"kind": "malliavin", "expect": "nondegenerate", "min_fraction": 0.99},
            "budgets": {"n_paths": 32, "eps_cut": 1e-7},
        },
    ]


def _example_2_3() -> List[Dict[str, Any]]:
    measure = {"kind": "factorial", "n_max": 60}
    return [
        {
            "id": "example-2.3/char-probe",
            "description": "|phi(2 pi N!)| of U_1 increases along N = 4..7",
            "measure": measure, "drift": {"kind": "zero", "dim": 1},
            "experiment": {"kind": "char_probe", "factorial_n": [4, 5, 6, 7], "expect_increasing": True},
            # atoms below 1/10! move the phase at 2 pi 7! by less than 1e-5
            "budgets": {"n_samples": 100_000, "eps_cut": 2e-7},
        },
        {
            "id": "example-2.3/indices",
            "description": "order indices of every power are infinite",
            "measure": measure, "drift": {"kind": "neg_identity", "dim": 1},
            "experiment": {"kind": "indices", "r_list": [1, 2, 4],
                           "expect": {"rho_1": "infinite", "rho_2": "infinite", "rho_4": "infinite"}},
        },
    ]


def _stable_alpha() -> List[Dict[str, Any]]:
    measure = {"kind": "stable", "alpha": 1.0}
    drift = {"kind": "neg_identity", "dim": 1}
    return [
        {
            "id": "stable-alpha/indices",
            "description": "rho_2 of the alpha = 1 stable measure is infinite",
            "measure": measure, "drift": drift,
            "experiment": {"kind": "indices", "r_list": [2], "n_eps": 24, "expect": {"rho_2": "infinite"}},
        },
        {
            "id": "stable-alpha/regime",
            "description": "smooth density for every t > 0",
            "measure": measure, "drift": drift,
            "experiment": {"kind": "regime", "r_list": [1], "expect_regime": "III.a"},
        },
    ]


def _ou_jump() -> List[Dict[str, Any]]:
    measure = {"kind": "finite_atoms", "locations": [[1.0]], "weights": [1.0]}
    drift = {"kind": "neg_identity", "dim": 1}
    return [
        {
            "id": "ou-jump/stationary",
            "description": "stationary mean of the jump OU process is 1",
            "measure": measure, "drift": drift, "compensate": False,
            "experiment": {"kind": "stationary", "burn_in": 20.0, "expect_mean": [1.0]},
            "budgets": {"n_samples": 10_000},
        },
        {
            "id": "ou-jump/derivative-check",
            "description": "forward differences along T_eps h converge to Y(t) at order one",
            "measure": measure, "drift": drift, "compensate": False,
            "experiment": {"kind": "derivative_check", "scheme": "forward", "eps_list": [1e-2, 1e-3, 1e-4],
                           "rel_tol": 1e-2, "expect_slope": 1.0, "slope_tol": 0.2},
            "budgets": {"n_paths": 20},
        },
        {
            "id": "ou-jump/admissibility",
            "description": "E p = 1 and the change of variables for the stretched configuration",
            "measure": measure, "drift": drift, "compensate": False,
            "experiment": {"kind": "admissibility", "window": 2.0, "box": 0.5},
            "budgets": {"n_samples": 100_000},
        },
    ]


def _stationary_smooth() -> List[Dict[str, Any]]:
    drift = {"kind": "neg_identity", "dim": 1}
    common = {"measure": _STATIONARY_STABLE, "drift": drift, "small_jumps": "gaussian_match"}
    return [
        dict(common, **{
            "id": "stationary-smooth/regime",
            "description": "dissipative drift and wide cone condition give a smooth stationary density",
            "experiment": {"kind": "regime", "r_list": [1], "stationary": True, "expect_regime": "II"},
        }),
        dict(common, **{
            "id": "stationary-smooth/stationary",
            "description": "stationary samples under bandwidth halving",
            "experiment": {"kind": "stationary", "burn_in": 8.0, "expect_verdict": "bounded-like"},
            "budgets": {"n_samples": 20_000, "eps_cut": 0.2},
        }),
        dict(common, **{
            "id": "stationary-smooth/tv-continuity",
            "description": "total variation between laws started at x0 and x0 + dx",
            "experiment": {"kind": "tv_continuity", "shifts": [0.5, 0.1, 0.02]},
            "budgets": {"n_samples": 20_000, "eps_cut": 0.2},
        }),
        dict(common, **{
            "id": "stationary-smooth/nondegeneracy",
            "description": "jump increments of the drift see every direction",
            "experiment": {"kind": "nondegeneracy", "n_list": [10, 100, 1000, 10000], "expect_holds": True},
        }),
    ]


_BUILTINS = {
    "example-2.1": ("parabola atoms, 2D: Fourier singularity and wide cone failure", _example_2_1),
    "example-2.2": ("geometric atoms gamma = e with a -x drift: gradual regularity", _example_2_2),
    "example-2.3": ("atoms n at 1/n!: singular noise with infinite indices", _example_2_3),
    "stable-alpha": ("alpha = 1 stable noise: smooth for all t", _stable_alpha),
    "ou-jump": ("-x drift with unit jumps: stationary mean, derivatives, admissibility", _ou_jump),
    "stationary-smooth": ("dissipative drift with a wide cone measure", _stationary_smooth),
}


def builtin_ids() -> List[str]:
    return list(_BUILTINS)


def builtin_scenarios(builtin_id: str) -> List[ScenarioSpec]:
    """Validated scenarios of one builtin"""
    if builtin_id not in _BUILTINS:
        raise ConfigError(f"unknown builtin scenario {builtin_id!r}; known: {', '.join(_BUILTINS)}")
    return [parse_scenario(data) for data in _BUILTINS[builtin_id][1]()]


def list_scenarios() -> List[Dict[str, Any]]:
    """Manifest of the builtin scenarios"""
    manifest = []
    for builtin_id, (summary, factory) in _BUILTINS.items():
        entries = factory()
        manifest.append({
            'id': builtin_id,
            'summary': summary,
            'scenarios': [{'id': e['id'], 'experiment': e['experiment']['kind']} for e in entries],
        })
    return manifest


def describe(scenario_id: str) -> Dict[str, Any]:
    """Resolved configuration of a builtin or of one of its scenarios"""
    builtin_id = scenario_id.split('/', 1)[0]
    scenarios = builtin_scenarios(builtin_id)
    if scenario_id != builtin_id:
        scenarios = [s for s in scenarios if s.id == scenario_id]
        if not scenarios:
            raise ConfigError(f"unknown scenario {scenario_id!r}")
    return {
        'id': scenario_id,
        'summary': _BUILTINS[builtin_id][0],
        'scenarios': [s.model_dump(mode='json') for s in scenarios],
    }
