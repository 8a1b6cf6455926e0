#!/usr/bin/env python3
"""
Runner Tests
============

Run configuration parsing, builtin scenarios, the scenario engine, report
files and the command line exit codes.
"""

import json
import os
import sys

import pytest
from click.testing import CliRunner

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from core.acceleration import ScenarioEngine
from core.errors import ConfigError, ExperimentFailure, ReportIOError
from core.runner import cli, execute_run, run_scenario
from core.runner.cli import EXIT_CONFIG, EXIT_FAILURE, resolve_scenarios
from core.runner.reports import load_report, strip_volatile, write_report
from core.runner.scenarios import builtin_ids, builtin_scenarios, describe, list_scenarios
from core.runner.schema import parse_run_config

REGIME = describe("example-2.2/regime")['scenarios'][0]

OU_STATIONARY = {
    "id": "ou/stationary",
    "measure": {"kind": "finite_atoms", "locations": [[1.0]], "weights": [1.0]},
    "drift": {"kind": "neg_identity", "dim": 1},
    "compensate": False,
    "experiment": {"kind": "stationary", "burn_in": 20.0, "expect_mean": [1.0]},
    "budgets": {"n_samples": 2000},
}


def _write_config(tmp_path, scenarios, **extra):
    path = tmp_path / "run.json"
    path.write_text(json.dumps(dict({"schema_version": 1, "run_seed": 7, "scenarios": scenarios}, **extra)))
    return str(path)


def _square(x):
    if x < 0:
        raise ValueError("negative")
    return x * x


class TestRunConfig:

    def test_schema_version_is_checked(self):
        with pytest.raises(ConfigError):
            parse_run_config({"schema_version": 2})

    def test_unknown_keys_rejected(self):
        with pytest.raises(ConfigError):
            parse_run_config({"schema_version": 1, "scenarioz": []})

    def test_scenario_defaults(self):
        config = parse_run_config({"schema_version": 1, "scenarios": [OU_STATIONARY]})
        scenario = config.scenarios[0]
        assert scenario.horizon == 1.0
        assert scenario.small_jumps == "drop"
        assert scenario.budgets.n_paths == 8

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError):
            resolve_scenarios(str(tmp_path / "absent.json"), ())

    def test_duplicate_ids(self, tmp_path):
        path = _write_config(tmp_path, [OU_STATIONARY, OU_STATIONARY])
        with pytest.raises(ConfigError):
            resolve_scenarios(path, ())

    def test_builtins_follow_file_scenarios(self, tmp_path):
        path = _write_config(tmp_path, [OU_STATIONARY], builtins=["stable-alpha"])
        scenarios, run_seed = resolve_scenarios(path, ())
        assert run_seed == 7
        assert [s.id for s in scenarios] == ["stable-alpha/indices", "stable-alpha/regime", "ou/stationary"]


class TestBuiltins:

    def test_manifest(self):
        manifest = list_scenarios()
        ids = [entry['id'] for entry in manifest]
        assert len(ids) >= 6
        assert {"example-2.1", "example-2.2", "example-2.3"} <= set(ids)
        assert ids == builtin_ids()
        assert all(entry['scenarios'] for entry in manifest)

    def test_every_builtin_validates(self):
        for builtin_id in builtin_ids():
            scenarios = builtin_scenarios(builtin_id)
            assert all(s.id.startswith(builtin_id + "/") for s in scenarios)

    def test_describe_single_scenario(self):
        info = describe("example-2.2/regime")
        assert len(info['scenarios']) == 1
        assert info['scenarios'][0]['experiment']['expect_band'] == [1.0, 6.3279]

    def test_describe_unknown(self):
        with pytest.raises(ConfigError):
            describe("example-9.9")
        with pytest.raises(ConfigError):
            describe("example-2.2/nothing")


class TestScenarioEngine:

    def test_serial_results_in_order(self):
        engine = ScenarioEngine({'num_workers': 1, 'show_progress': False})
        results = engine.run(_square, [3, 1, 2])
        assert engine.backend == 'serial'
        assert [r.value for r in results] == [9, 1, 4]
        assert engine.metrics.tasks_completed == 3

    def test_threading_results_in_order(self):
        engine = ScenarioEngine({'backend': 'threading', 'num_workers': 3, 'show_progress': False})
        results = engine.run(_square, list(range(8)))
        assert engine.backend == 'threading'
        assert [r.value for r in results] == [i * i for i in range(8)]

    def test_failures_are_recorded(self):
        engine = ScenarioEngine({'num_workers': 1, 'show_progress': False})
        results = engine.run(_square, [2, -1], task_ids=["ok", "bad"])
        assert results[0].success
        assert not results[1].success
        assert results[1].error_type == "ValueError"
        assert engine.metrics.tasks_failed == 1

    def test_unknown_backend(self):
        with pytest.raises(ValueError):
            ScenarioEngine({'backend': 'cluster', 'num_workers': 2})


class TestScenarioRuns:

    def test_reference_regime_passes(self):
        report = run_scenario({'scenario': REGIME, 'run_seed': 1})
        assert report['status'] == 'passed'
        assert report['result']['regime'] == "III.b"
        lower, upper = report['result']['verdict']['band']
        assert lower == pytest.approx(1.0)
        assert upper == pytest.approx(6.3279, abs=1e-4)
        assert report['seeds']['run_seed'] == 1

    def test_wrong_expectation_is_a_failed_check(self):
        scenario = dict(REGIME, experiment=dict(REGIME['experiment'], expect_regime="I", expect_band=None))
        report = run_scenario({'scenario': scenario, 'run_seed': 1})
        assert report['status'] == 'failed'
        assert report['failed_invariants'] == ["regime"]

    def test_stationary_mean(self):
        report = run_scenario({'scenario': OU_STATIONARY, 'run_seed': 3})
        assert report['status'] == 'passed'
        assert report['result']['mean'][0] == pytest.approx(1.0, abs=0.1)
        assert [row['factor'] for row in report['tables']['sup_density']] == [1.0, 0.5, 0.25]

    def test_dimension_mismatch(self):
        scenario = dict(OU_STATIONARY, drift={"kind": "neg_identity", "dim": 2})
        with pytest.raises(ConfigError):
            run_scenario({'scenario': scenario, 'run_seed': 3})


class TestExecuteRun:

    def test_run_writes_reports_and_manifest(self, tmp_path):
        path = _write_config(tmp_path, [REGIME])
        summary = execute_run(path, str(tmp_path / "out"), jobs=1)
        assert summary['run_seed'] == 7
        assert summary['scenarios'][0]['status'] == 'passed'
        assert summary['scenarios'][0]['files'] == ["example-2.2__regime.json"]
        manifest = load_report(tmp_path / "out" / "manifest.json")
        assert manifest['run_seed'] == 7
        assert set(manifest) == {'version', 'run_seed', 'scenarios', 'generated_at'}

    def test_reruns_are_reproducible(self, tmp_path):
        path = _write_config(tmp_path, [OU_STATIONARY])
        execute_run(path, str(tmp_path / "a"), jobs=1)
        execute_run(path, str(tmp_path / "b"), jobs=1)
        first = load_report(tmp_path / "a" / "ou__stationary.json")
        second = load_report(tmp_path / "b" / "ou__stationary.json")
        assert 'generated_at' in first
        assert strip_volatile(first) == strip_volatile(second)

    def test_seed_override(self, tmp_path):
        path = _write_config(tmp_path, [OU_STATIONARY])
        execute_run(path, str(tmp_path / "a"), seed=7, jobs=1)
        execute_run(path, str(tmp_path / "b"), seed=8, jobs=1)
        first = load_report(tmp_path / "a" / "ou__stationary.json")
        second = load_report(tmp_path / "b" / "ou__stationary.json")
        assert second['seeds']['run_seed'] == 8
        assert first['result']['mean'] != second['result']['mean']

    def test_csv_tables(self, tmp_path):
        path = _write_config(tmp_path, [OU_STATIONARY])
        summary = execute_run(path, str(tmp_path / "out"), fmt="csv", jobs=1)
        assert "ou__stationary__sup_density.csv" in summary['scenarios'][0]['files']
        lines = (tmp_path / "out" / "ou__stationary__sup_density.csv").read_text().splitlines()
        assert lines[0] == "factor,bandwidth,max_density"
        assert len(lines) == 4

    def test_failed_check_raises(self, tmp_path):
        scenario = dict(REGIME, experiment=dict(REGIME['experiment'], expect_regime="I", expect_band=None))
        path = _write_config(tmp_path, [scenario])
        with pytest.raises(ExperimentFailure):
            execute_run(path, str(tmp_path / "out"), jobs=1)
        manifest = load_report(tmp_path / "out" / "manifest.json")
        assert manifest['scenarios'][0]['status'] == 'failed'

    def test_rejected_parameters_in_worker(self, tmp_path):
        scenario = {
            "id": "narrow-window",
            "measure": {"kind": "finite_atoms", "locations": [[1.0]], "weights": [1.0]},
            "drift": {"kind": "neg_identity"},
            "experiment": {"kind": "admissibility", "window": 0.6, "box": 0.5},
            "budgets": {"n_samples": 100},
        }
        path = _write_config(tmp_path, [scenario])
        with pytest.raises(ConfigError):
            execute_run(path, str(tmp_path / "out"), jobs=1)
        report = load_report(tmp_path / "out" / "narrow-window.json")
        assert report['status'] == 'error'
        assert report['error']['type'] == "ConfigError"

    def test_unwritable_output(self, tmp_path):
        blocker = tmp_path / "file"
        blocker.write_text("")
        with pytest.raises(ReportIOError):
            write_report({'scenario': "x", 'tables': {}}, blocker / "out")


class TestCommandLine:

    def test_empty_run(self, tmp_path):
        result = CliRunner().invoke(cli, ['run', '--out', str(tmp_path / "out")])
        assert result.exit_code == 0
        manifest = load_report(tmp_path / "out" / "manifest.json")
        assert manifest['scenarios'] == []

    def test_run_config(self, tmp_path):
        path = _write_config(tmp_path, [REGIME])
        result = CliRunner().invoke(cli, ['run', '--config', path, '--out', str(tmp_path / "out"), '--jobs', '1'])
        assert result.exit_code == 0
        assert (tmp_path / "out" / "example-2.2__regime.json").exists()

    def test_bad_schema_version(self, tmp_path):
        path = tmp_path / "run.json"
        path.write_text(json.dumps({"schema_version": 3}))
        result = CliRunner().invoke(cli, ['run', '--config', str(path), '--out', str(tmp_path / "out")])
        assert result.exit_code == EXIT_CONFIG

    def test_invalid_json(self, tmp_path):
        path = tmp_path / "run.json"
        path.write_text("{not json")
        result = CliRunner().invoke(cli, ['run', '--config', str(path), '--out', str(tmp_path / "out")])
        assert result.exit_code == EXIT_CONFIG

    def test_unknown_builtin(self, tmp_path):
        result = CliRunner().invoke(cli, ['run', '--builtin', 'nope', '--out', str(tmp_path / "out")])
        assert result.exit_code == EXIT_CONFIG

    def test_failure_exit_code(self, tmp_path):
        scenario = dict(REGIME, experiment=dict(REGIME['experiment'], expect_regime="II", expect_band=None))
        path = _write_config(tmp_path, [scenario])
        result = CliRunner().invoke(cli, ['run', '--config', path, '--out', str(tmp_path / "out"), '--jobs', '1'])
        assert result.exit_code == EXIT_FAILURE

    def test_list(self):
        result = CliRunner().invoke(cli, ['list'])
        assert result.exit_code == 0
        ids = [entry['id'] for entry in json.loads(result.output)['builtins']]
        assert "ou-jump" in ids

    def test_describe(self):
        result = CliRunner().invoke(cli, ['describe', 'example-2.3'])
        assert result.exit_code == 0
        assert json.loads(result.output)['id'] == "example-2.3"

    def test_describe_unknown(self):
        result = CliRunner().invoke(cli, ['describe', 'example-0'])
        assert result.exit_code == EXIT_CONFIG


@pytest.mark.slow
class TestBuiltinAcceptance:

    @pytest.mark.parametrize("builtin_id", ["example-2.1", "example-2.2", "example-2.3", "stable-alpha",
                                            "ou-jump", "stationary-smooth"])
    def test_builtin_passes(self, builtin_id, tmp_path):
        summary = execute_run(None, str(tmp_path), builtins=[builtin_id], jobs=1)
        assert all(entry['status'] == 'passed' for entry in summary['scenarios'])

    @pytest.mark.parametrize("scenario_id", ["example-2.2/sup-density", "stationary-smooth/stationary"])
    def test_density_verdicts_across_seeds(self, scenario_id):
        scenario = describe(scenario_id)['scenarios'][0]
        reports = [run_scenario({'scenario': scenario, 'run_seed': seed}) for seed in range(5)]
        assert sum(r['status'] == 'passed' for r in reports) >= 4
        assert all(r['checks'] for r in reports)
