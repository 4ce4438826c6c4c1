"""Exception hierarchy shared by every facetproto module."""

from __future__ import annotations


class FacetProtoError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(FacetProtoError):
    """A file could not be parsed; carries the path and 1-based line number."""

    def __init__(self, path: str, line_no: int, message: str):
        self.path = str(path)
        self.line_no = line_no
        super().__init__(f"{self.path}:{line_no}: {message}")


class DuplicateRecordError(ParseError):
    """Two records share a key that must be unique."""


class ValidationError(FacetProtoError):
    """Parsed content violates a structural invariant."""


class DimensionError(FacetProtoError):
    """Vector or matrix shapes do not agree."""


class ConfigurationError(FacetProtoError):
    """A parameter value is outside its legal range."""


class CapacityError(FacetProtoError):
    """A bank cannot supply the requested episode; names the offender."""


class MissingEmbeddingError(FacetProtoError):
    """No class embedding exists for a class id required by an episode."""

    def __init__(self, class_id: str):
        self.class_id = class_id
        super().__init__(f"no embedding for class {class_id!r}")


class PairingError(FacetProtoError):
    """Two evaluation reports cannot be compared episode-by-episode."""
