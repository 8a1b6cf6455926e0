"""LevyLab Core Components"""

__version__ = "1.0.0"

from .errors import LevyLabError

__all__ = ["LevyLabError", "__version__"]
