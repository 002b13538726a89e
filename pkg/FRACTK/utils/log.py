"""
Utility: Logging setup.
One stderr handler on the application logger hierarchy; stdout is reserved for artifacts.
"""
import logging
import sys
from typing import Optional

from config import settings

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"
_ROOT_PACKAGES = ("geometry", "analysis", "services", "utils", "main")


def configure_logging(level: Optional[str] = None) -> None:
    """Attach a single stream handler to each application package logger."""
    resolved = (level or settings.log_level).upper()
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter(LOG_FORMAT))
    for name in _ROOT_PACKAGES:
        log = logging.getLogger(name)
        log.handlers.clear()
        log.addHandler(handler)
        log.setLevel(resolved)
        log.propagate = False
