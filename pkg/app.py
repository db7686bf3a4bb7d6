"""
ivexpand — gH calculus and expansions of interval-valued functions
Command-line entry point.

Run:  python app.py expand --expr "exp([-1,2]*t)" --arity 1 --about 1 --order 3
"""

from __future__ import annotations

import sys

from loguru import logger

# ---------------------------------------------------------------------------
# Lazy import of the package, gives a clear error if dependencies are missing
# ---------------------------------------------------------------------------

try:
    from ivexpand.cli import main
except ImportError as exc:
    logger.error("Failed to import ivexpand: {}. Run `pip install -r requirements.txt` and retry.", exc)
    sys.exit(1)


if __name__ == "__main__":
    sys.exit(main())
