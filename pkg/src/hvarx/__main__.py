"""Entry point for python -m hvarx."""

import sys

from hvarx.cli import main

sys.exit(main())
