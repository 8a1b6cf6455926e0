#!/usr/bin/env python3
"""
Scenario Experiments
====================

One function per experiment kind. Each receives a ScenarioContext (built
measure, drift, cutoff scheme, initial point and the derived scenario
seed), returns a result mapping, fills CSV tables and records every
asserted invariant through ctx.check(). A failed check does not stop the
experiment; the scenario report lists it and the run exits nonzero.

run_scenario() is the picklable worker entry used by the scenario engine.
"""

import logging
import time
from functools import cached_property
from typing import Any, Callable, Dict, List, Optional

import numpy as np
from tqdm import tqdm

from config.settings import Config
from .. import __version__
from ..drift import DriftField, dissipativity_check, k_r_certificate, nondegeneracy_trend, preimage_check, \
    subspace_avoidance_check
from ..errors import ConfigError, NonConvergent
from ..measures import (IndexClass, IndexKind, LevyMeasure, classify_index, estimate_order_index,
                        lower_index_profile, moment_checks, order_index_profile, small_jump_variance_profile,
                        wide_cone_check)
from ..measures.indices import default_eps_grid
from ..simulation import (CutoffScheme, SmallJumpMode, default_burn_in, derivative_process, derive_seed,
                          exponent_bounds, malliavin_matrix, sample_batch, sample_configuration,
                          simulate_endpoints, solve_path, stationary_sample, stochastic_exponent)
from ..variations import admissibility_batch, build_grid, finite_diff_derivative, time_stretch_map, transform_batch
from ..variations.grid import DEFAULT_EPS_FLOOR
from ..diagnostics import (analytic_char_modulus, char_function_probe, common_lattice, density_estimate,
                           factorial_frequencies, regularity_report, sup_density_trend, tv_distance,
                           tv_noise_level)
from . import schema
from .builders import build_cell, build_drift, build_measure, build_scheme, build_stretch, initial_point

logger = logging.getLogger(__name__)

# error slopes are only meaningful above round-off
SLOPE_ERROR_FLOOR = 1e-10


class ScenarioContext:
    """Built objects, seeds and check ledger of one scenario"""

    def __init__(self, scenario: schema.ScenarioSpec, run_seed: int):
        self.scenario = scenario
        self.run_seed = int(run_seed)
        self.seed = int(scenario.seed) if scenario.seed is not None else derive_seed(run_seed, scenario.id)
        self.measure: LevyMeasure = build_measure(scenario.measure)
        self.drift: DriftField = build_drift(scenario.drift)
        if self.measure.dim != self.drift.dim:
            raise ConfigError(f"scenario {scenario.id}: measure lives in dimension {self.measure.dim}, "
                              f"drift in {self.drift.dim}")
        self.x0 = initial_point(scenario, self.drift.dim)
        self.checks: List[Dict[str, Any]] = []
        self.tables: Dict[str, List[Dict[str, Any]]] = {}

    @property
    def experiment(self):
        return self.scenario.experiment

    @property
    def budgets(self) -> schema.Budgets:
        return self.scenario.budgets

    @cached_property
    def scheme(self) -> CutoffScheme:
        return build_scheme(self.scenario, self.measure)

    def sub_seed(self, tag: str) -> int:
        return derive_seed(self.seed, tag)

    def check(self, invariant: str, passed: bool, detail: str = "") -> bool:
        passed = bool(passed)
        self.checks.append({'invariant': invariant, 'passed': passed, 'detail': detail})
        if not passed:
            logger.warning("Scenario %s failed %s: %s", self.scenario.id, invariant, detail,
                           extra={'scenario': self.scenario.id, 'invariant': invariant})
        return passed

    @property
    def failed(self) -> List[str]:
        return [c['invariant'] for c in self.checks if not c['passed']]

    def progress(self, n: int, desc: str):
        return tqdm(range(n), desc=f"{self.scenario.id} {desc}", leave=False, disable=not Config.SHOW_PROGRESS)

    def endpoints(self, x0, t: float, tag: str) -> np.ndarray:
        return simulate_endpoints(self.drift, self.measure, self.scheme, x0, t, self.budgets.n_samples,
                                  self.sub_seed(tag), step=self.budgets.step, event_budget=self.budgets.event_budget)

    def configuration(self, t: float, replica: int):
        return sample_configuration(self.measure, (0.0, t), self.scheme.eps_cut, self.seed, replica,
                                    event_budget=self.budgets.event_budget)


# -- index and cone experiments ---------------------------------------------

def _index_value(value) -> IndexClass:
    value = float(value)
    if np.isinf(value):
        return IndexClass(IndexKind.INFINITE, slope=float('inf'))
    if value == 0:
        return IndexClass(IndexKind.ZERO, 0.0, 0.0, slope=float('-inf'))
    return IndexClass(IndexKind.FINITE, value, 0.0)


def run_indices(ctx: ScenarioContext) -> Dict[str, Any]:
    exp = ctx.experiment
    eps = default_eps_grid(ctx.measure, exp.n_eps)
    profiles = {'theta': lower_index_profile(ctx.measure, eps, exp.dir_grid)}
    classes = {'theta': classify_index(profiles['theta'])}
    for r in exp.r_list:
        name = f"rho_{r}"
        profiles[name] = order_index_profile(ctx.measure, r, exp.apertures[0], eps, exp.dir_grid)
        classes[name] = classify_index(profiles[name], exp.apertures)
    profiles['variance'] = small_jump_variance_profile(ctx.measure, eps)
    classes['variance'] = classify_index(profiles['variance'])

    ctx.tables['profiles'] = [
        {'eps': float(e), **{name: float(p.values[i]) for name, p in profiles.items()}}
        for i, e in enumerate(eps)
    ]
    for name, kind in exp.expect.items():
        got = classes.get(name)
        ctx.check(f"index-{name}", got is not None and got.kind.value == kind,
                  f"expected {kind}, got {None if got is None else got.kind.value}")
    return {
        'indices': {name: c.to_dict() for name, c in classes.items()},
        'reference': dict(ctx.measure.reference),
        'moments': moment_checks(ctx.measure).to_dict(),
    }


def run_wide_cone(ctx: ScenarioContext) -> Dict[str, Any]:
    exp = ctx.experiment
    report = wide_cone_check(ctx.measure, exp.varrho, exp.dir_grid, exp.mass_threshold)
    ctx.tables['cone_masses'] = [
        {'floor': float(f), 'min_mass': float(report.masses[:, j].min()), 'max_mass': float(report.masses[:, j].max())}
        for j, f in enumerate(report.floors)
    ]
    if exp.expect_holds is not None:
        ctx.check("wide-cone", report.holds == exp.expect_holds,
                  f"expected holds={exp.expect_holds}, witness {report.witness}")
    return {'wide_cone': report.to_dict()}


def _regime_indices(ctx: ScenarioContext, exp) -> Dict[str, IndexClass]:
    reference = ctx.measure.reference if exp.indices_source == "reference" else {}

    def lookup(name: str, power: Optional[int]) -> IndexClass:
        value = reference.get(name, reference.get('rho') if power is not None else None)
        if value is not None:
            return _index_value(value)
        if power is None:
            return classify_index(lower_index_profile(ctx.measure))
        return estimate_order_index(ctx.measure, power)

    indices = {'theta': lookup('theta', None), 'rho_1': lookup('rho_1', 1)}
    for r in exp.r_list:
        indices[f"rho_{2 * r}"] = lookup(f"rho_{2 * r}", 2 * r)
    if ctx.drift.dim == 1:
        indices['rho'] = indices['rho_1']
    return indices


def run_regime(ctx: ScenarioContext) -> Dict[str, Any]:
    exp = ctx.experiment
    indices = _regime_indices(ctx, exp)
    drift_pass, certificates = {}, {}
    for r in exp.r_list:
        cert = k_r_certificate(ctx.drift, r, exp.varrho, seed=ctx.seed)
        drift_pass[int(r)] = cert.passed
        certificates[f"K_{r}"] = cert.to_dict()
    cone = wide_cone_check(ctx.measure, exp.varrho)
    dissipative = dissipativity_check(ctx.drift)
    stationary = exp.stationary and dissipative.holds

    report = regularity_report(ctx.scenario.id, drift_pass, indices, cone.holds, m=ctx.drift.dim,
                               k_list=exp.k_list, stationary=stationary)
    if exp.expect_regime is not None:
        ctx.check("regime", report.regime == exp.expect_regime,
                  f"expected {exp.expect_regime}, got {report.regime} ({report.inconclusive or ''})")
    if exp.expect_band is not None:
        band = None if report.verdict is None else report.verdict.band
        ok = band is not None and band[0] is not None and all(
            abs(got - want) <= exp.band_tol for got, want in zip(band, exp.expect_band))
        ctx.check("regime-band", ok, f"expected {exp.expect_band}, got {band}")

    out = report.to_dict()
    out.update({'certificates': certificates, 'wide_cone_detail': cone.to_dict(),
                'dissipativity': dissipative.to_dict(), 'indices_source': exp.indices_source})
    return out


# -- Monte Carlo experiments -------------------------------------------------

def _count_before(batch, box: float) -> np.ndarray:
    inside = batch.times < box
    return np.bincount(batch.replica_index[inside], minlength=batch.n_replicas).astype(float)


def _void_before(batch, box: float) -> np.ndarray:
    return (_count_before(batch, box) == 0).astype(float)


def _discounted_marks(batch, box: float) -> np.ndarray:
    inside = batch.times < box
    weights = np.exp(-batch.times[inside]) * np.linalg.norm(batch.marks[inside], axis=1)
    return np.bincount(batch.replica_index[inside], weights=weights, minlength=batch.n_replicas)


FUNCTIONALS: Dict[str, Callable] = {
    'count': _count_before,
    'void': _void_before,
    'discounted_marks': _discounted_marks,
}


def run_admissibility(ctx: ScenarioContext) -> Dict[str, Any]:
    exp = ctx.experiment
    stretch = build_stretch(exp.stretch)
    cell = build_cell(exp.cell)
    reach = float(time_stretch_map(stretch, 1.0, np.array([exp.box]))[0])
    if reach >= exp.window:
        raise ConfigError(f"scenario {ctx.scenario.id}: T_h(box) = {reach:.4g} leaves the window {exp.window}")

    n = ctx.budgets.n_samples
    eps_cut = ctx.scheme.eps_cut
    batch = sample_batch(ctx.measure, (0.0, exp.window), eps_cut, n, ctx.seed,
                         event_budget=ctx.budgets.event_budget)
    cell_mass = cell.mass(ctx.measure, eps_cut)
    density = admissibility_batch(batch, stretch, cell, cell_mass)
    moved = transform_batch(batch, stretch, cell)

    mean_p = float(density.mean())
    se_p = float(density.std(ddof=1) / np.sqrt(n)) if n > 1 else float('inf')
    ctx.check("admissibility-mean", abs(mean_p - 1.0) <= exp.n_se * se_p,
              f"E p = {mean_p:.5f} +- {se_p:.2g}")

    rows = []
    for name, functional in FUNCTIONALS.items():
        after = functional(moved, exp.box)
        weighted = density * functional(batch, exp.box)
        lhs, rhs = float(after.mean()), float(weighted.mean())
        se = float(np.sqrt(after.var(ddof=1) / n + weighted.var(ddof=1) / n)) if n > 1 else float('inf')
        ok = abs(lhs - rhs) <= exp.n_se * se if se > 0 else lhs == rhs
        ctx.check(f"admissibility-{name}", ok, f"E phi(T nu) = {lhs:.5f}, E p phi(nu) = {rhs:.5f}, se {se:.2g}")
        rows.append({'functional': name, 'lhs': lhs, 'rhs': rhs, 'se': se, 'passed': bool(ok)})

    retained = ctx.measure.retained_mass(eps_cut)
    rows[0]['exact'] = float((retained - cell_mass) * exp.box + cell_mass * reach)
    ctx.tables['identity'] = rows
    return {
        'mean_density': mean_p,
        'density_se': se_p,
        'cell_mass': float(cell_mass),
        'c_inf': float(stretch.c_inf()),
        'T_h_box': reach,
        'stretch': stretch.describe(),
        'replicas': n,
    }


def run_derivative_check(ctx: ScenarioContext) -> Dict[str, Any]:
    exp = ctx.experiment
    stretch = build_stretch(exp.stretch)
    cell = build_cell(exp.cell)
    t = ctx.scenario.horizon
    step = ctx.budgets.step

    def endpoint(config):
        return solve_path(ctx.drift, config, ctx.scheme, ctx.x0, step, t_start=0.0, t_end=t).final_state

    rows, slopes, mismatches = [], [], []
    for i in ctx.progress(ctx.budgets.n_paths, "derivatives"):
        config = ctx.configuration(t, i)
        path = solve_path(ctx.drift, config, ctx.scheme, ctx.x0, step, t_start=0.0, t_end=t)
        derivative = derivative_process(path, ctx.drift, stretch, cell, t)
        try:
            fd = finite_diff_derivative(endpoint, config, stretch, cell, exp.eps_list, exp.scheme,
                                        reference=derivative)
        except NonConvergent as e:
            mismatches.append(f"path {i}: {e}")
            continue
        error = float(np.linalg.norm(fd.extrapolated - derivative))
        scale = max(1.0, float(np.linalg.norm(derivative)))
        if error > exp.rel_tol * scale:
            mismatches.append(f"path {i}: error {error:.3g}")
        if fd.error_slope is not None and fd.errors[-1] > SLOPE_ERROR_FLOOR:
            slopes.append(fd.error_slope)
        rows.append({'path': i, 'events': config.n_events, 'derivative_norm': float(np.linalg.norm(derivative)),
                     'fd_norm': float(np.linalg.norm(fd.extrapolated)), 'error': error,
                     'error_slope': fd.error_slope, 'order': fd.order})

    ctx.tables['paths'] = rows
    ctx.check("derivative-match", not mismatches, "; ".join(mismatches))
    median_slope = float(np.median(slopes)) if slopes else None
    if exp.expect_slope is not None:
        ctx.check("derivative-order",
                  median_slope is not None and abs(median_slope - exp.expect_slope) <= exp.slope_tol,
                  f"median error slope {median_slope}, expected {exp.expect_slope} +- {exp.slope_tol}")
    return {'scheme': exp.scheme, 'eps': list(exp.eps_list), 'paths': len(rows),
            'median_error_slope': median_slope, 'stretch': stretch.describe()}


def _events_per_cell(grid, config, t: float) -> int:
    cells = grid.locate(config.times, config.marks, config.aux)
    cells = cells[(cells >= 0) & (config.times <= t)]
    if cells.size == 0:
        return 0
    return int(np.unique(cells, return_counts=True)[1].max())


def run_malliavin(ctx: ScenarioContext) -> Dict[str, Any]:
    exp = ctx.experiment
    t = ctx.scenario.horizon
    grid = build_grid(ctx.measure, t, exp.B, exp.gamma, exp.shape_beta, exp.eps_floor or DEFAULT_EPS_FLOOR)
    ctx.check("grid-disjoint", grid.cells_disjoint())
    ctx.check("grid-compatible", grid.stretches_compatible())
    refined = grid.refined(2)

    rows, bound_failures, refinement_failures = [], [], []
    for i in ctx.progress(ctx.budgets.n_paths, "malliavin"):
        config = ctx.configuration(t, i)
        path = stochastic_exponent(solve_path(ctx.drift, config, ctx.scheme, ctx.x0, ctx.budgets.step,
                                              t_start=0.0, t_end=t), ctx.drift)
        bounds = exponent_bounds(path, ctx.drift)
        if not bounds.holds:
            bound_failures.append(i)
        gd = malliavin_matrix(path, ctx.drift, grid, t)
        if _events_per_cell(grid, config, t) <= 1:
            fine = malliavin_matrix(path, ctx.drift, refined, t)
            if not np.allclose(gd.sigma, fine.sigma, rtol=1e-10, atol=1e-14):
                refinement_failures.append(i)
        rows.append({'path': i, 'events': config.n_events, 'occupied_cells': int(gd.cell_ids.size),
                     'lambda_min': gd.lambda_min, 'trace': float(np.trace(gd.sigma)),
                     'nondegenerate': gd.nondegenerate})

    ctx.tables['paths'] = rows
    ctx.check("exponent-bounds", not bound_failures, f"paths {bound_failures}")
    ctx.check("refinement-invariance", not refinement_failures, f"paths {refinement_failures}")

    occupied = [r for r in rows if r['occupied_cells'] > 0]
    fraction = (sum(r['nondegenerate'] for r in occupied) / len(occupied)) if occupied else None
    if exp.expect == "zero":
        ctx.check("malliavin-zero", all(r['trace'] == 0.0 for r in rows), "nonzero Malliavin matrix")
    elif exp.expect == "nondegenerate":
        ctx.check("malliavin-nondegenerate", fraction is not None and fraction >= exp.min_fraction,
                  f"nondegenerate fraction {fraction} on {len(occupied)} occupied paths")
    return {'grid': grid.to_dict(), 'occupied_paths': len(occupied), 'nondegenerate_fraction': fraction}


def run_density_sweep(ctx: ScenarioContext) -> Dict[str, Any]:
    exp = ctx.experiment
    times = list(ctx.scenario.t_list) or [ctx.scenario.horizon]
    samples = {t: ctx.endpoints(ctx.x0, t, f"t={t!r}") for t in times}
    trend = sup_density_trend(samples, exp.factors)

    ctx.tables['sup_density'] = [
        {'t': row.t, 'factor': f, 'bandwidth': h, 'max_density': peak, 'log_slope': row.slope,
         'verdict': row.verdict}
        for row in trend for f, h, peak in zip(exp.factors, row.bandwidths, row.maxima)
    ]
    for key, verdict in exp.expect.items():
        match = [row for row in trend if np.isclose(row.t, float(key))]
        got = match[0].verdict if match else None
        ctx.check("sup-density-trend", got == verdict, f"t={key}: expected {verdict}, got {got}")
    return {'rows': [row.to_dict() for row in trend], 'samples_per_t': ctx.budgets.n_samples}


def run_char_probe(ctx: ScenarioContext) -> Dict[str, Any]:
    exp = ctx.experiment
    t = ctx.scenario.horizon
    m = ctx.drift.dim
    if exp.coordinate >= m:
        raise ConfigError(f"scenario {ctx.scenario.id}: coordinate {exp.coordinate} outside dimension {m}")
    z = np.concatenate([factorial_frequencies(exp.factorial_n), np.asarray(exp.z_list, dtype=float)])
    labels = [f"2pi*{n}!" for n in exp.factorial_n] + [f"z={v:g}" for v in exp.z_list]
    samples = ctx.endpoints(ctx.x0, t, "endpoints")
    probe = char_function_probe(samples[:, exp.coordinate], z, labels)

    pure_jump = ctx.drift.is_linear and not np.any(ctx.drift.matrix)
    if pure_jump and ctx.scheme.mode is SmallJumpMode.DROP:
        freqs = np.zeros((z.size, m))
        freqs[:, exp.coordinate] = z
        probe.analytic = analytic_char_modulus(ctx.measure, freqs, t, ctx.scheme.eps_cut)
        within = probe.within(exp.n_se)
        ctx.check("char-probe-analytic", bool(np.all(within)),
                  f"outside {exp.n_se} SE at {[labels[k] for k in np.flatnonzero(~within)]}")
    if exp.expect_increasing:
        ladder = probe.modulus[:len(exp.factorial_n)]
        ctx.check("char-probe-increasing", bool(np.all(np.diff(ladder) > 0)),
                  f"moduli {np.round(ladder, 5).tolist()}")
    ctx.tables['char_probe'] = probe.rows()
    return {'probe': probe.to_dict(), 'coordinate': exp.coordinate, 't': t, 'eps_cut': ctx.scheme.eps_cut}


def _halves_tv(samples: np.ndarray) -> Dict[str, float]:
    half = len(samples) // 2
    first, second = samples[:half], samples[half:]
    lattice = common_lattice(first, second)
    e1 = density_estimate(first, "histogram", lattice=lattice)
    e2 = density_estimate(second, "histogram", lattice=lattice)
    counts = e1.values * e1.cell_volumes * e1.n_samples
    return {'tv': tv_distance(e1, e2), 'noise': tv_noise_level(counts, e2.n_samples)}


def run_stationary(ctx: ScenarioContext) -> Dict[str, Any]:
    exp = ctx.experiment
    n = ctx.budgets.n_samples
    burn_in = exp.burn_in or default_burn_in(ctx.drift)
    samples = stationary_sample(ctx.drift, ctx.measure, ctx.scheme, burn_in, n, ctx.seed, ctx.x0,
                                step=ctx.budgets.step)
    mean = samples.mean(axis=0)
    se = samples.std(axis=0, ddof=1) / np.sqrt(n)
    if exp.expect_mean is not None:
        expected = np.asarray(exp.expect_mean, dtype=float)
        if expected.shape != mean.shape:
            raise ConfigError(f"scenario {ctx.scenario.id}: expect_mean must have length {mean.size}")
        ctx.check("stationary-mean", bool(np.all(np.abs(mean - expected) <= exp.n_se * se)),
                  f"mean {mean.tolist()} +- {se.tolist()}, expected {expected.tolist()}")

    trend = sup_density_trend({burn_in: samples}, exp.factors)[0]
    if exp.expect_verdict is not None:
        ctx.check("stationary-density", trend.verdict == exp.expect_verdict,
                  f"expected {exp.expect_verdict}, got {trend.verdict}")
    ctx.tables['sup_density'] = [{'factor': f, 'bandwidth': h, 'max_density': peak}
                                 for f, h, peak in zip(exp.factors, trend.bandwidths, trend.maxima)]
    return {
        'burn_in': burn_in,
        'dissipativity': dissipativity_check(ctx.drift).to_dict(),
        'mean': mean.tolist(),
        'mean_se': se.tolist(),
        'covariance': np.atleast_2d(np.cov(samples, rowvar=False)).tolist(),
        'sup_density': trend.to_dict(),
        'halves': _halves_tv(samples),
    }


def run_tv_continuity(ctx: ScenarioContext) -> Dict[str, Any]:
    exp = ctx.experiment
    t = ctx.scenario.horizon
    base = ctx.endpoints(ctx.x0, t, "base")
    direction = np.zeros(ctx.drift.dim)
    direction[0] = 1.0
    rows = []
    for dx in exp.shifts:
        shifted = ctx.endpoints(ctx.x0 + dx * direction, t, f"dx={dx!r}")
        lattice = common_lattice(base, shifted)
        e1 = density_estimate(base, "histogram", lattice=lattice)
        e2 = density_estimate(shifted, "histogram", lattice=lattice)
        noise = tv_noise_level(e1.values * e1.cell_volumes * e1.n_samples, e2.n_samples)
        tv = tv_distance(e1, e2)
        rows.append({'dx': float(dx), 'tv': tv, 'noise_level': noise, 'within_noise': tv <= noise})
    ctx.tables['tv'] = rows
    ordered = sorted(rows, key=lambda r: -r['dx'])
    return {'rows': rows, 'shrinking': all(a['tv'] >= b['tv'] for a, b in zip(ordered, ordered[1:]))}


def run_nondegeneracy(ctx: ScenarioContext) -> Dict[str, Any]:
    exp = ctx.experiment
    x = ctx.x0 if exp.x is None else np.asarray(exp.x, dtype=float)
    if x.shape != (ctx.drift.dim,):
        raise ConfigError(f"scenario {ctx.scenario.id}: x must have length {ctx.drift.dim}")
    trend = nondegeneracy_trend(ctx.drift, ctx.measure, x, n_list=exp.n_list, tol=exp.tol)
    cert = k_r_certificate(ctx.drift, exp.r, exp.varrho, seed=ctx.seed)
    summary = trend.to_dict()
    out = {'trend': summary, 'k_r': cert.to_dict()}
    if summary['weakest_direction'] is not None:
        out['preimage'] = preimage_check(ctx.drift, x, summary['weakest_direction'], ctx.measure,
                                         lo=1.0 / max(exp.n_list), tol=exp.tol)
    if ctx.measure.dim >= 2:
        out['subspaces'] = subspace_avoidance_check(ctx.measure)
    ctx.tables['masses'] = [
        {'n': float(n), 'weakest_mass': float(trend.masses[:, k].min()), 'strongest_mass': float(trend.masses[:, k].max())}
        for k, n in enumerate(trend.n_list)
    ]
    if exp.expect_holds is not None:
        ctx.check("nondegeneracy", trend.holds == exp.expect_holds,
                  f"expected holds={exp.expect_holds}, weakest direction {summary['weakest_direction']}")
    return out


EXPERIMENTS: Dict[str, Callable[[ScenarioContext], Dict[str, Any]]] = {
    'indices': run_indices,
    'wide_cone': run_wide_cone,
    'admissibility': run_admissibility,
    'derivative_check': run_derivative_check,
    'malliavin': run_malliavin,
    'density_sweep': run_density_sweep,
    'char_probe': run_char_probe,
    'stationary': run_stationary,
    'regime': run_regime,
    'tv_continuity': run_tv_continuity,
    'nondegeneracy': run_nondegeneracy,
}


def run_scenario(payload: Dict[str, Any]) -> Dict[str, Any]:
    """
    Worker entry. The payload holds the scenario as plain data and the run
    seed, so it pickles for the multiprocessing backend.
    """
    scenario = schema.parse_scenario(payload['scenario'])
    ctx = ScenarioContext(scenario, payload['run_seed'])
    kind = scenario.experiment.kind
    start = time.time()
    logger.info("Running scenario %s (%s)", scenario.id, kind, extra={'scenario': scenario.id, 'experiment': kind})
    result = EXPERIMENTS[kind](ctx)
    failed = ctx.failed
    logger.info("Scenario %s %s in %.2fs", scenario.id, "failed" if failed else "passed", time.time() - start,
                extra={'scenario': scenario.id, 'experiment': kind, 'elapsed': time.time() - start})
    return {
        'schema_version': schema.SCHEMA_VERSION,
        'version': __version__,
        'scenario': scenario.id,
        'description': scenario.description,
        'experiment': kind,
        'seeds': {'run_seed': ctx.run_seed, 'scenario_seed': ctx.seed},
        'config': scenario.model_dump(mode='json'),
        'status': 'failed' if failed else 'passed',
        'failed_invariants': failed,
        'checks': ctx.checks,
        'result': result,
        'tables': ctx.tables,
    }
