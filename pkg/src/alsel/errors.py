"""Exception types shared across the package."""


class AlselError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(AlselError):
    """Input violates a documented precondition or type invariant."""


class EmptyPoolError(ValidationError):
    """A selector was asked to pick from a pool with no unlabelled images."""


class FormatError(ValidationError):
    """A file does not conform to one of the on-disk formats.

    Carries enough context (path, and line or byte offset where known) to
    point at the offending spot.
    """

    def __init__(self, message: str, *, path=None, line=None, offset=None):
        parts = []
        if path is not None:
            parts.append(str(path))
        if line is not None:
            parts.append(f"line {line}")
        if offset is not None:
            parts.append(f"byte {offset}")
        prefix = ": ".join(parts)
        super().__init__(f"{prefix}: {message}" if prefix else message)
        self.path = path
        self.line = line
        self.offset = offset


class MissingDataError(AlselError):
    """Replayed detector output is exhausted or absent for an iteration."""
