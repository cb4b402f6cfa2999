"""Exception hierarchy. Each error carries the exit code the CLI maps it to."""


class SogPlaceError(Exception):
    """Base class for every error raised by the library"""

    exit_code = 1


class ConfigurationError(SogPlaceError):
    """Bad configuration, bad parameters or mismatched grid/class tables"""

    exit_code = 2


class ValidationError(SogPlaceError):
    """An argument value violates its contract"""

    exit_code = 2


class GridMismatchError(ConfigurationError):
    """Stored data was built on a different grid or class table"""

    exit_code = 3


class IngestError(SogPlaceError):
    exit_code = 3


class ParseError(IngestError):
    """Malformed line in a text input"""

    def __init__(self, path, line_no, reason):
        self.path = str(path)
        self.line_no = line_no
        self.reason = reason
        super().__init__(f"{self.path}:{line_no}: {reason}")


class FormatError(IngestError):
    """Malformed binary P-SOG file"""


class EmptyAccumulatorError(SogPlaceError):
    exit_code = 3


class UndefinedMetricError(SogPlaceError):
    """Metric requested over an empty coverage set"""

    exit_code = 4


class UndefinedCorrelationError(SogPlaceError):
    exit_code = 4


class OptimizerStateError(SogPlaceError):
    exit_code = 4


class InsufficientDataError(SogPlaceError):
    exit_code = 4


IO_EXIT_CODE = IngestError.exit_code


def exit_code_for(error):
    """CLI exit code for a library error or an operating-system I/O failure"""
    if isinstance(error, SogPlaceError):
        return error.exit_code
    if isinstance(error, OSError):
        return IO_EXIT_CODE
    return 1
