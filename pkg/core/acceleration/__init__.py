"""Scenario-level worker pool"""

from .distributed_engine import EngineMetrics, ScenarioEngine, ScenarioTask, TaskResult

__all__ = ["EngineMetrics", "ScenarioEngine", "ScenarioTask", "TaskResult"]
