"""Exception hierarchy shared by every cubelock module.

The CLI maps each family onto an exit code, so library code raises the most
specific class it can.
"""


class CubelockError(Exception):
    exit_code = 1


class ParameterError(CubelockError, ValueError):
    """A parameter is outside the range an operation supports."""

    exit_code = 4


class CapacityError(ParameterError):
    """An input does not fit the configured capacity (bits, table size, message)."""


class IntegrityError(CubelockError):
    """Recovered data failed a structural check."""

    exit_code = 3


class PaddingError(IntegrityError):
    pass


class WrongKeyError(IntegrityError):
    """Ciphertext was produced under a different prime."""


class FormatError(CubelockError):
    """A key, ciphertext, chain or table file is malformed."""

    exit_code = 3

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class UsageError(CubelockError):
    """Bad command-line usage that argparse itself cannot catch."""

    exit_code = 2
