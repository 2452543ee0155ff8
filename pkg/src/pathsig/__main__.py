"""Run the CLI as ``python -m pathsig``."""

import sys

from .cli import main

sys.exit(main())
