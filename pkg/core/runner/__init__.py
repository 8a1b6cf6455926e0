"""Scenario configuration, experiments, reports and the command line"""

from .schema import SCHEMA_VERSION, RunConfig, ScenarioSpec, load_run_config, parse_run_config, parse_scenario
from .scenarios import builtin_ids, builtin_scenarios, describe, list_scenarios
from .experiments import EXPERIMENTS, ScenarioContext, run_scenario
from .reports import load_report, strip_volatile, write_manifest, write_report
from .cli import cli, execute_run

__all__ = [
    "SCHEMA_VERSION", "RunConfig", "ScenarioSpec", "load_run_config", "parse_run_config", "parse_scenario",
    "builtin_ids", "builtin_scenarios", "describe", "list_scenarios",
    "EXPERIMENTS", "ScenarioContext", "run_scenario",
    "load_report", "strip_volatile", "write_manifest", "write_report",
    "cli", "execute_run",
]
