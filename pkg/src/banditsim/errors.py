"""Exception types shared across the package."""


class ConfigError(ValueError):
    """Invalid experiment, policy, or environment parameters."""


class DataError(ValueError):
    """Malformed input data (logs, decision records)."""


class LogFormatError(DataError):
    """A logged event failed validation.

    ``line`` is the 1-based line number in the source file (the header is
    line 1), or None when the event did not come from a file.
    """

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class StateCorruptionError(RuntimeError):
    """Policy state holds values no valid sequence of updates can produce."""
