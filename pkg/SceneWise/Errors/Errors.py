"""
Errors.py

Created: 09/02/26
Last Modified: 10/11/26

Description: Exception types raised across SceneWise. Every component raises
one of these instead of a bare Exception so that the command line entry point
can map failures onto stable exit codes:

    0   success
    1   domain failure (budget verdicts, data and metric preconditions, I/O)
    2   usage or parse error (bad flags, malformed graph or config files)
"""
# Library Imports.


# Custom Imports.


class SceneWiseError(Exception):
    """
    Base class of every error raised by SceneWise.
    """

    exitCode = 1


class InvalidInputError(SceneWiseError):
    """Audio input that cannot be processed (empty, too short, multi-channel)."""


class ConfigurationError(SceneWiseError):
    """A configuration value or configuration file is invalid."""

    exitCode = 2


class GraphParseError(SceneWiseError):
    """
    A graph definition file does not follow the grammar. Carries the 1-based
    line number of the offending line.
    """

    exitCode = 2

    def __init__(self, message, lineNumber=None):
        if lineNumber is not None:
            message = "line " + str(lineNumber) + ": " + message
        super(GraphParseError, self).__init__(message)
        self.lineNumber = lineNumber


class GraphValidationError(SceneWiseError):
    """Layer shapes do not chain, or a layer's hyperparameters are invalid."""

    exitCode = 2


class FusionUnsupportedError(SceneWiseError):
    """A batchnorm layer cannot be folded into a preceding convolution."""


class NonFiniteError(SceneWiseError):
    """A loss or gradient became NaN or infinite."""


class CheckpointError(SceneWiseError):
    """A checkpoint file is unreadable, truncated or tampered with."""


class FormatError(SceneWiseError):
    """A manifest or submission file does not follow the expected layout."""


class RegistryError(SceneWiseError):
    """A device id is not part of the known-device registry."""


class DataError(SceneWiseError):
    """The data selected for an operation is empty or inconsistent."""


class BankError(SceneWiseError):
    """A model bank is incomplete or references unregistered devices."""


class BudgetError(SceneWiseError):
    """
    A model exceeds the complexity budget. The offending ComplexityReport is
    attached so callers can render the audit table.
    """

    def __init__(self, message, report=None):
        super(BudgetError, self).__init__(message)
        self.report = report


class MetricError(SceneWiseError):
    """Metrics requested over records that carry no ground truth."""
