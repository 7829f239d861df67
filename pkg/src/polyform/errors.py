"""Exception hierarchy shared by every module."""


class PolyformError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(PolyformError, ValueError):
    pass


class DuplicateCell(ParseError):
    pass


class InvalidCell(PolyformError, ValueError):
    pass


class Disconnected(PolyformError, ValueError):
    pass


class MalformedDegrees(PolyformError, ValueError):
    pass


class InvalidNode(PolyformError, ValueError):
    pass


class InvalidLevel(PolyformError, ValueError):
    pass


class InvalidIndex(PolyformError, ValueError):
    pass


class IndexOutOfRange(PolyformError, IndexError):
    pass


class InvalidThickness(PolyformError, ValueError):
    pass


class InvalidK(PolyformError, ValueError):
    pass


class EmptyComposition(PolyformError, ValueError):
    pass


class ZeroBar(PolyformError, ValueError):
    pass


class ContainerError(PolyformError, ValueError):
    """Raised for malformed or unsupported container bytes."""
