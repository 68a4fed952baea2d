"""Schema-constrained generative long-term memory for dialogue agents."""
import logging
import os

LOG_FORMAT = "%(asctime)s %(levelname)s [%(name)s] %(message)s"

_configured = False


def get_logger(name, level=None):
    """Return a module logger, installing the package handler on first use."""
    global _configured
    if not _configured:
        handler = logging.StreamHandler()
        handler.setFormatter(logging.Formatter(LOG_FORMAT))
        root = logging.getLogger("memory")
        root.addHandler(handler)
        root.setLevel(level or os.environ.get("SCHEMA_MEMORY_LOG_LEVEL", "WARNING"))
        _configured = True
    elif level:
        logging.getLogger("memory").setLevel(level)
    return logging.getLogger(name)
