"""LevyLab configuration"""

from .settings import Config, LabConfig, DevelopmentConfig, TestingConfig, configure_logging

__all__ = ["Config", "LabConfig", "DevelopmentConfig", "TestingConfig", "configure_logging"]
