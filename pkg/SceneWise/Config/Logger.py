"""
Logger.py

Created: 09/02/26
Last Modified: 10/03/26

Description: Logging setup shared by all SceneWise components. The verbosity is
read once from the SCENEWISE_LOG environment variable, which may be one of
"error", "info" or "debug".
"""
# Library Imports.
import logging
import os
import sys

# Custom Imports.


# Root logger name; component loggers hang off it, i.e. "scenewise.training".
ROOT_NAME = "scenewise"

# Mapping of the accepted SCENEWISE_LOG values to logging levels.
LEVELS = {"error": logging.ERROR, "info": logging.INFO, "debug": logging.DEBUG}

_configured = False


def configureLogging(level=None):
    """
    Attaches a stderr handler to the root SceneWise logger. Safe to call more
    than once; only the level is updated on repeat calls.

    Parameters
    ----------
    level: String
        One of "error", "info", "debug". When None, SCENEWISE_LOG is consulted.
    """
    global _configured

    requested = level if level is not None else os.environ.get("SCENEWISE_LOG", "info")
    requested = requested.strip().lower()
    logger = logging.getLogger(ROOT_NAME)

    if not _configured:
        handler = logging.StreamHandler(sys.stderr)
        handler.setFormatter(
            logging.Formatter("%(asctime)s %(levelname)s %(name)s: %(message)s")
        )
        logger.addHandler(handler)
        logger.propagate = False
        _configured = True

    if requested in LEVELS:
        logger.setLevel(LEVELS[requested])
    else:
        logger.setLevel(logging.INFO)
        logger.warning("Unknown SCENEWISE_LOG value %r; using info.", requested)


def getLogger(component):
    """
    Returns the logger of a SceneWise component.

    Parameters
    ----------
    component: String
        Short component name, i.e. "frontend" or "training".

    Returns
    -------
    logging.Logger: the component logger.
    """
    return logging.getLogger(ROOT_NAME + "." + component)
