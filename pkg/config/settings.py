"""
LevyLab Configuration
=====================

Environment-driven settings for the numerical lab. Numerical defaults live
here as named constants so every module reads the same values.
"""

import logging
import os
import sys
from typing import Any, Dict, List, Optional

logger = logging.getLogger(__name__)


def _env_bool(name: str, default: str) -> bool:
    return os.getenv(name, default).lower() in ('1', 'true', 'yes')


class LabConfig:
    """Production configuration for LevyLab runs"""

    # Logging
    LOG_LEVEL = os.getenv('LEVYLAB_LOG_LEVEL', 'INFO')
    LOG_FORMAT = os.getenv('LEVYLAB_LOG_FORMAT', 'json')  # json or text

    # Execution
    NUM_WORKERS = int(os.getenv('LEVYLAB_WORKERS', os.cpu_count() or 1))
    WORKER_BACKEND = os.getenv('LEVYLAB_BACKEND', 'threading')  # serial, threading or multiprocessing
    DEFAULT_SEED = int(os.getenv('LEVYLAB_SEED', 20240917))
    SHOW_PROGRESS = _env_bool('LEVYLAB_PROGRESS', 'true')

    # Levy measures
    ATOM_TRUNCATION = 60
    DIRECTION_COUNT = 256
    RADIAL_KNOTS = 4096
    QUAD_EPSABS = 1e-14
    QUAD_EPSREL = 1e-10
    QUAD_LIMIT = 200

    # Simulation
    EVENT_BUDGET = float(os.getenv('LEVYLAB_EVENT_BUDGET', 1e7))
    MAX_RATE_PER_UNIT_TIME = 1e4
    RK4_STEP = 1e-3
    BLOWUP_NORM = 1e12
    EXPONENT_DEFECT_TOL = 1e-6
    REPLICAS_PER_BLOCK = 4096

    # Time stretches
    STRETCH_STEP = 1e-4
    STRETCH_KNOTS = 4096
    GAUSS_LEGENDRE_NODES = 64

    # Diagnostics
    MIN_DENSITY_SAMPLES = 100
    DENSITY_LATTICE = 512
    EXACT_KDE_LIMIT = 2e7  # samples x lattice points evaluated exactly
    BANDWIDTH_LADDER = (1.0, 0.5, 0.25)
    MAX_FACTORIAL_N = 8

    # Caching
    SAMPLER_CACHE_SIZE = 64

    SIMULATION_CONFIG = {
        'rk4_step': RK4_STEP,
        'blowup_norm': BLOWUP_NORM,
        'event_budget': EVENT_BUDGET,
        'replicas_per_block': REPLICAS_PER_BLOCK,
    }

    @classmethod
    def get_simulation_config(cls) -> Dict[str, Any]:
        """Get simulation configuration"""
        return cls.SIMULATION_CONFIG.copy()

    @classmethod
    def validate(cls) -> List[str]:
        """Validate configuration, logging each issue"""
        issues = []

        if cls.LOG_FORMAT not in ('json', 'text'):
            issues.append(f"LOG_FORMAT must be json or text, got {cls.LOG_FORMAT!r}")

        if cls.WORKER_BACKEND not in ('serial', 'threading', 'multiprocessing', 'auto'):
            issues.append(f"WORKER_BACKEND must be serial, threading, multiprocessing or auto, got {cls.WORKER_BACKEND!r}")

        if cls.NUM_WORKERS < 1:
            issues.append("NUM_WORKERS must be at least 1")

        if cls.EVENT_BUDGET < 1:
            issues.append("EVENT_BUDGET must be positive")

        for issue in issues:
            logger.warning("Configuration issue: %s", issue)

        return issues


class DevelopmentConfig(LabConfig):
    """Development configuration"""

    LOG_LEVEL = 'DEBUG'
    LOG_FORMAT = 'text'


class TestingConfig(LabConfig):
    """Configuration used by the test suite"""

    LOG_LEVEL = 'WARNING'
    LOG_FORMAT = 'text'
    NUM_WORKERS = 1
    SHOW_PROGRESS = False


def configure_logging(level: Optional[str] = None, fmt: Optional[str] = None):
    """Install the root handler; JSON lines unless the text format is requested"""
    level = level or Config.LOG_LEVEL
    fmt = fmt or Config.LOG_FORMAT

    handler = logging.StreamHandler(sys.stderr)
    if fmt == 'json':
        from pythonjsonlogger import jsonlogger
        handler.setFormatter(jsonlogger.JsonFormatter(
            '%(asctime)s %(levelname)s %(name)s %(message)s'))
    else:
        handler.setFormatter(logging.Formatter(
            '%(asctime)s %(levelname)-7s %(name)s: %(message)s'))

    root = logging.getLogger()
    for existing in list(root.handlers):
        root.removeHandler(existing)
    root.addHandler(handler)
    root.setLevel(level.upper())


# Select configuration based on environment
ENV = os.getenv('LEVYLAB_ENV', 'development')

if ENV == 'production':
    Config = LabConfig
elif ENV == 'testing':
    Config = TestingConfig
else:
    Config = DevelopmentConfig

# Validate on import
Config.validate()
