#!/usr/bin/env python3
"""
Launcher for qmrational
-----------------------
Runs the command line from a source checkout without installing it:

    ./run.py decide instances/c4_sigma2.toml
"""

import os
import sys

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from src.main import main  # noqa: E402

if __name__ == "__main__":
    sys.exit(main())
