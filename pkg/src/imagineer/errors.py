"""Exception types raised across the package."""


class ImagineerError(Exception):
    """Base class for all package errors."""


class FormatError(ImagineerError):
    """A record or file does not follow the expected layout."""

    def __init__(self, message, line=None, path=None):
        where = []
        if path is not None:
            where.append(str(path))
        if line is not None:
            where.append(f"line {line}")
        prefix = ":".join(where)
        super().__init__(f"{prefix}: {message}" if prefix else message)
        self.line = line
        self.path = path


class DomainError(ImagineerError, ValueError):
    """A value lies outside its allowed domain."""


class EmptyCorpus(ImagineerError):
    pass


class MissingDescription(ImagineerError):
    pass


class InsufficientData(ImagineerError):
    pass


class MissingTable(ImagineerError, KeyError):
    """A conditional table was queried for a key never seen at fit time."""


class DimMismatch(ImagineerError, ValueError):
    pass


class SingleClass(ImagineerError, ValueError):
    pass


class EmptyGrid(ImagineerError, ValueError):
    pass


class LengthMismatch(ImagineerError, ValueError):
    pass


class NoPositives(ImagineerError, ValueError):
    pass


class MissingResponses(ImagineerError):
    pass
