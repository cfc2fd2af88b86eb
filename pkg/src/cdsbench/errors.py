"""Exception hierarchy shared across the package."""


class CdsBenchError(Exception):
    """Base class for all package errors."""


class FormatError(CdsBenchError, ValueError):
    """Malformed input file or stream."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ConfigError(CdsBenchError, ValueError):
    """Invalid configuration: bad parameters, missing resources, bad stage order."""


class BuildError(CdsBenchError, ValueError):
    """Index construction failed (e.g. duplicate document ids)."""


class EvaluationError(CdsBenchError):
    """Metric or statistics computation could not be carried out."""
