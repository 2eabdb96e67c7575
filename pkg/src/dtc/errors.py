class DTCError(Exception):
    """Base class for errors raised by this package."""


class DuplicateEdgeError(DTCError):
    """An edge was offered to a sampler that already holds it."""


class StreamIntegrityError(DTCError):
    """A stream violates the insertion/deletion validity contract."""


class UnsupportedOperationError(DTCError):
    """The requested operation is not supported by the chosen algorithm."""


class ConfigError(DTCError, ValueError):
    pass


class ParseError(DTCError, ValueError):
    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line
