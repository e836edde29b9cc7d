"""Run the command line interface with python -m colecole."""

import sys

from .cli import main

sys.exit(main())
