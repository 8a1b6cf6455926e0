#!/usr/bin/env python3
"""
LevyLab Command Line
====================

    levylab run --config run.json --out reports --seed 7 --format csv --jobs 4
    levylab run --builtin example-2.2 --builtin ou-jump
    levylab list
    levylab describe example-2.3

Exit codes: 0 success, 2 configuration error, 3 experiment failure,
4 report I/O error.
"""

import json
import logging
import sys
from datetime import datetime, timezone
from typing import Any, Dict, List, Optional, Sequence

import click

from config.settings import Config, configure_logging
from .. import __version__
from ..acceleration import ScenarioEngine, TaskResult
from ..errors import ConfigError, ExperimentFailure, ReportIOError
from .experiments import ScenarioContext, run_scenario
from .reports import dumps, write_manifest, write_report
from .scenarios import builtin_scenarios, describe, list_scenarios
from .schema import SCHEMA_VERSION, ScenarioSpec, load_run_config

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_FAILURE = 3
EXIT_IO = 4


def resolve_scenarios(config_path: Optional[str], builtins: Sequence[str]):
    """Scenarios of the config file followed by the requested builtins, plus the file's run seed"""
    scenarios: List[ScenarioSpec] = []
    run_seed = None
    if config_path:
        run_config = load_run_config(config_path)
        run_seed = run_config.run_seed
        for builtin_id in run_config.builtins:
            scenarios.extend(builtin_scenarios(builtin_id))
        scenarios.extend(run_config.scenarios)
    for builtin_id in builtins:
        scenarios.extend(builtin_scenarios(builtin_id))

    seen = set()
    for scenario in scenarios:
        if scenario.id in seen:
            raise ConfigError(f"scenario id {scenario.id!r} appears twice in the run")
        seen.add(scenario.id)
    return scenarios, run_seed


def _error_report(scenario: ScenarioSpec, result: TaskResult, run_seed: int) -> Dict[str, Any]:
    invariant = result.extra.get('invariant') or result.error_type
    return {
        'schema_version': SCHEMA_VERSION,
        'version': __version__,
        'scenario': scenario.id,
        'description': scenario.description,
        'experiment': scenario.experiment.kind,
        'seeds': {'run_seed': run_seed, 'scenario_seed': None},
        'config': scenario.model_dump(mode='json'),
        'status': 'error',
        'failed_invariants': [invariant],
        'checks': [],
        'error': {'type': result.error_type, 'message': result.error},
        'result': {},
        'tables': {},
    }


def execute_run(config_path: Optional[str], out_dir: str, seed: Optional[int] = None, fmt: str = "json",
                jobs: Optional[int] = None, builtins: Sequence[str] = ()) -> Dict[str, Any]:
    """
    Run every scenario and write the reports plus manifest.json.

    Raises ConfigError for unusable configurations (also when a scenario
    rejects its parameters while running), ExperimentFailure when any
    scenario failed a check or crashed, ReportIOError when writing fails.
    """
    scenarios, file_seed = resolve_scenarios(config_path, builtins)
    run_seed = seed if seed is not None else (file_seed if file_seed is not None else Config.DEFAULT_SEED)
    generated_at = datetime.now(timezone.utc).isoformat(timespec='seconds')
    for scenario in scenarios:
        # measure, drift and dimensions resolve before any worker starts
        ScenarioContext(scenario, run_seed)

    engine = ScenarioEngine({'num_workers': jobs or Config.NUM_WORKERS})
    payloads = [{'scenario': s.model_dump(mode='json'), 'run_seed': run_seed} for s in scenarios]
    results = engine.run(run_scenario, payloads, [s.id for s in scenarios]) if scenarios else []

    entries, failures, config_errors = [], [], []
    for scenario, result in zip(scenarios, results):
        report = result.value if result.success else _error_report(scenario, result, run_seed)
        if result.error_type == ConfigError.__name__:
            config_errors.append(f"{scenario.id}: {result.error}")
        elif report['status'] != 'passed':
            failures.append((scenario.id, report['failed_invariants']))
        files = write_report(report, out_dir, fmt, generated_at)
        entries.append({'id': scenario.id, 'experiment': scenario.experiment.kind, 'status': report['status'],
                        'failed_invariants': report['failed_invariants'], 'files': [p.name for p in files]})
    manifest = write_manifest(entries, out_dir, run_seed, generated_at)
    logger.info("Wrote %d scenario reports to %s", len(entries), out_dir,
                extra={'run_seed': run_seed, 'failed': len(failures)})

    if config_errors:
        raise ConfigError("; ".join(config_errors))
    if failures:
        first_id, first_invariants = failures[0]
        raise ExperimentFailure(first_invariants[0] if first_invariants else first_id,
                                "; ".join(f"{sid} [{', '.join(inv)}]" for sid, inv in failures))
    return {'manifest': str(manifest), 'run_seed': run_seed, 'scenarios': entries}


@click.group()
def cli():
    """Levy-driven SDE regularity lab"""


@cli.command()
@click.option('--config', 'config_path', type=str, default=None, help="JSON run configuration")
@click.option('--out', 'out_dir', type=str, default="reports", show_default=True, help="Report directory")
@click.option('--seed', type=click.IntRange(min=0), default=None, help="Override the run seed")
@click.option('--format', 'fmt', type=click.Choice(['json', 'csv']), default='json', show_default=True)
@click.option('--jobs', type=click.IntRange(min=1), default=None, help="Scenarios run in parallel")
@click.option('--builtin', 'builtins', multiple=True, help="Builtin scenario id (repeatable)")
@click.option('--log-level', type=click.Choice(['DEBUG', 'INFO', 'WARNING', 'ERROR'], case_sensitive=False),
              default=None)
def run(config_path, out_dir, seed, fmt, jobs, builtins, log_level):
    """Run scenarios and write one report per scenario"""
    configure_logging(log_level)
    try:
        summary = execute_run(config_path, out_dir, seed, fmt, jobs, builtins)
    except ConfigError as e:
        click.echo(f"configuration error: {e}", err=True)
        sys.exit(EXIT_CONFIG)
    except ExperimentFailure as e:
        click.echo(f"experiment failure: {e.detail or e}", err=True)
        sys.exit(EXIT_FAILURE)
    except ReportIOError as e:
        click.echo(f"report error: {e}", err=True)
        sys.exit(EXIT_IO)
    click.echo(f"{len(summary['scenarios'])} scenarios passed, manifest at {summary['manifest']}")


@cli.command(name='list')
def list_command():
    """Print the builtin scenario manifest"""
    click.echo(dumps({'builtins': list_scenarios()}))


@cli.command(name='describe')
@click.argument('scenario_id')
def describe_command(scenario_id):
    """Print the resolved configuration of a builtin scenario"""
    try:
        click.echo(json.dumps(describe(scenario_id), indent=2))
    except ConfigError as e:
        click.echo(f"configuration error: {e}", err=True)
        sys.exit(EXIT_CONFIG)


def main():
    cli()


if __name__ == '__main__':
    main()
