#!/usr/bin/env python3
"""
LevyLab Benchmark Suite
=======================

Throughput of the numerical kernels and of the scenario engine:
- configuration sampling
- path solving and batch endpoints
- kernel density estimates
- serial against threaded scenario runs
"""

import json
import os
import platform
import sys
import time
from dataclasses import asdict, dataclass, field
from datetime import datetime
from typing import Any, Callable, Dict, List, Tuple

import numpy as np
import psutil

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from core.acceleration import ScenarioEngine
from core.diagnostics import density_estimate
from core.drift import neg_identity, polynomial_drift
from core.measures import geometric_atoms, stable_measure
from core.runner import describe, run_scenario
from core.simulation import make_scheme, sample_batch, simulate_endpoints, solve_path


@dataclass
class BenchmarkResult:
    """Individual benchmark result"""
    name: str
    category: str
    duration_ms: float
    operations_per_second: float
    speedup_factor: float
    memory_usage_mb: float
    cpu_usage_percent: float
    details: Dict[str, Any] = field(default_factory=dict)


@dataclass
class SystemInfo:
    os: str
    python_version: str
    numpy_version: str
    cpu_count: int
    cpu_model: str
    total_memory_gb: float


class LevyLabBenchmark:
    """
    Benchmark suite for the sampling, solving and density kernels
    """

    def __init__(self, scale: float = 1.0):
        self.scale = scale
        self.results: List[BenchmarkResult] = []
        self.system_info = self._get_system_info()

    def _get_system_info(self) -> SystemInfo:
        return SystemInfo(
            os=platform.system(),
            python_version=platform.python_version(),
            numpy_version=np.__version__,
            cpu_count=psutil.cpu_count() or 1,
            cpu_model=platform.processor() or "Unknown",
            total_memory_gb=psutil.virtual_memory().total / (1024 ** 3),
        )

    def _measure_resources(self) -> Tuple[float, float]:
        cpu_percent = psutil.cpu_percent(interval=0.1)
        memory_mb = psutil.Process().memory_info().rss / (1024 * 1024)
        return cpu_percent, memory_mb

    def _timed(self, name: str, category: str, operations: int, fn: Callable[[], Any],
               baseline_ms: float = 0.0, **details) -> BenchmarkResult:
        _, mem_start = self._measure_resources()
        start = time.time()
        fn()
        duration = (time.time() - start) * 1000
        cpu_end, mem_end = self._measure_resources()
        result = BenchmarkResult(
            name=name,
            category=category,
            duration_ms=duration,
            operations_per_second=operations * 1000.0 / duration if duration > 0 else float('inf'),
            speedup_factor=baseline_ms / duration if baseline_ms and duration > 0 else 1.0,
            memory_usage_mb=mem_end - mem_start,
            cpu_usage_percent=cpu_end,
            details=details,
        )
        self.results.append(result)
        print(f"  {name}: {duration:.1f}ms ({result.operations_per_second:.1f} ops/s)")
        return result

    def run_all_benchmarks(self):
        print("LEVYLAB BENCHMARK SUITE")
        print("=" * 70)
        self._print_system_info()

        print("\nRunning benchmarks...\n")
        self.benchmark_sampling()
        self.benchmark_solving()
        self.benchmark_density()
        self.benchmark_engine()
        self._generate_report()

    def _print_system_info(self):
        print("\nSYSTEM INFORMATION")
        print("-" * 70)
        print(f"OS: {self.system_info.os}")
        print(f"Python: {self.system_info.python_version} (numpy {self.system_info.numpy_version})")
        print(f"CPU: {self.system_info.cpu_model} ({self.system_info.cpu_count} cores)")
        print(f"Memory: {self.system_info.total_memory_gb:.1f} GB")

    def benchmark_sampling(self):
        """Events per second of the batch sampler"""
        print("\n1. CONFIGURATION SAMPLING")
        print("-" * 50)
        n = int(20_000 * self.scale)
        for label, measure, eps in (("geometric atoms", geometric_atoms(np.e), np.exp(-6.0)),
                                    ("alpha = 1 stable", stable_measure(1.0), 0.02)):
            holder = {}

            def draw():
                holder['batch'] = sample_batch(measure, (0.0, 1.0), eps, n, seed=1)

            result = self._timed(f"Sample {n} replicas ({label})", "Sampling", n, draw, eps_cut=eps)
            events = int(holder['batch'].counts.sum())
            result.details['events'] = events
            result.details['events_per_second'] = events * 1000.0 / result.duration_ms

    def benchmark_solving(self):
        """Single paths against vectorised batch endpoints"""
        print("\n2. PATH SOLVING")
        print("-" * 50)
        measure = geometric_atoms(np.e)
        eps = np.exp(-4.0)
        scheme = make_scheme(measure, eps)
        n = int(500 * self.scale)
        batch = sample_batch(measure, (0.0, 1.0), eps, n, seed=2)

        for label, drift in (("linear", neg_identity(1)), ("cubic", polynomial_drift([0.0, -1.0, 0.0, -1.0]))):
            def one_by_one():
                for i in range(n):
                    solve_path(drift, batch.configuration(i), scheme, [0.5])

            single = self._timed(f"solve_path x{n} ({label})", "Solving", n, one_by_one)
            self._timed(f"simulate_endpoints x{n} ({label})", "Solving", n,
                        lambda: simulate_endpoints(drift, measure, scheme, [0.5], 1.0, n, seed=2),
                        baseline_ms=single.duration_ms)

    def benchmark_density(self):
        """Exact against binned kernel sums"""
        print("\n3. DENSITY ESTIMATES")
        print("-" * 50)
        samples = np.random.default_rng(3).standard_normal(int(20_000 * self.scale))
        exact = self._timed(f"Exact KDE ({samples.size} samples)", "Density", samples.size,
                            lambda: density_estimate(samples, method="exact"))
        self._timed(f"Binned KDE ({samples.size} samples)", "Density", samples.size,
                    lambda: density_estimate(samples, method="binned"), baseline_ms=exact.duration_ms)

    def benchmark_engine(self):
        """The same scenarios through the serial and threaded backends"""
        print("\n4. SCENARIO ENGINE")
        print("-" * 50)
        payloads = [{'scenario': s, 'run_seed': seed}
                    for seed in range(4) for s in describe("example-2.2/regime")['scenarios']]
        serial = ScenarioEngine({'num_workers': 1, 'show_progress': False})
        base = self._timed(f"{len(payloads)} scenarios (serial)", "Engine", len(payloads),
                           lambda: serial.run(run_scenario, payloads))
        workers = min(4, self.system_info.cpu_count)
        threaded = ScenarioEngine({'backend': 'threading', 'num_workers': workers, 'show_progress': False})
        self._timed(f"{len(payloads)} scenarios (threading, {workers} workers)", "Engine", len(payloads),
                    lambda: threaded.run(run_scenario, payloads), baseline_ms=base.duration_ms, workers=workers)

    def _generate_report(self):
        print("\n" + "=" * 70)
        print("BENCHMARK SUMMARY REPORT")
        print("=" * 70)

        categories: Dict[str, List[BenchmarkResult]] = {}
        for result in self.results:
            categories.setdefault(result.category, []).append(result)

        for category, results in categories.items():
            print(f"\n{category.upper()}:")
            print("-" * 50)
            for result in results:
                print(f"\n{result.name}:")
                print(f"  Duration: {result.duration_ms:.2f}ms")
                print(f"  Throughput: {result.operations_per_second:.1f} ops/s")
                print(f"  Speedup: {result.speedup_factor:.1f}x")
                for key, value in result.details.items():
                    print(f"    {key}: {value:.4g}" if isinstance(value, float) else f"    {key}: {value}")

        report_data = {
            'timestamp': datetime.now().isoformat(),
            'system_info': asdict(self.system_info),
            'results': [asdict(r) for r in self.results],
        }
        report_path = os.path.join(os.path.dirname(os.path.abspath(__file__)), 'benchmark_report.json')
        with open(report_path, 'w') as f:
            json.dump(report_data, f, indent=2)
        print(f"\nFull report saved to: {report_path}")


def main():
    scale = float(sys.argv[1]) if len(sys.argv) > 1 else 1.0
    LevyLabBenchmark(scale).run_all_benchmarks()


if __name__ == "__main__":
    main()
