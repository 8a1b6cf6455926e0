#!/usr/bin/env python3
"""
LevyLab
=======

Command line entry point. See core/runner/cli.py for the commands.
"""

import os
import sys

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from core.runner.cli import main  # noqa: E402

if __name__ == '__main__':
    main()
