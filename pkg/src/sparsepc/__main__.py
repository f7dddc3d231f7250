"""Entry point for ``python -m sparsepc``."""

import sys

from .cli import main

sys.exit(main())
