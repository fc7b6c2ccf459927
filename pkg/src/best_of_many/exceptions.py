"""Exception hierarchy shared by every module of the package."""

from typing import Any, Dict, List, Optional


class BmsError(Exception):
    """Base exception for all best-of-many errors."""

    exit_code = 1

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None) -> None:
        self.message = message
        self.details = details or {}
        super().__init__(message)


class ShapeMismatch(BmsError):
    """Raised when tensor extents disagree with what an operation requires."""

    exit_code = 2


class DomainError(BmsError):
    """Raised when an input lies outside an operation's domain (e.g. log of 0)."""

    exit_code = 2


class EmptyInput(BmsError):
    """Raised when a reduction receives no elements."""

    exit_code = 2


class NotScalar(BmsError):
    """Raised when backward is requested from a non-scalar tensor."""

    exit_code = 2


class NumericalError(BmsError):
    """Raised when a forward pass produces NaN or Inf."""

    exit_code = 3


class InvalidAlpha(BmsError):
    """Raised when the hybrid mixing weight lies outside [0, 1]."""

    exit_code = 2


class MissingY(BmsError):
    """Raised when recognition sampling is requested without a future sequence."""

    exit_code = 2


class InvalidSpec(BmsError):
    """Raised when a dataset generator specification is invalid."""

    exit_code = 2


class ParseError(BmsError):
    """Raised when a dataset line cannot be parsed."""

    exit_code = 2

    def __init__(
        self, message: str, line: int, details: Optional[Dict[str, Any]] = None
    ) -> None:
        self.line = line
        super().__init__(message, {"line": line, **(details or {})})


class SchemaError(BmsError):
    """Raised when a dataset record misses required fields or has bad values."""

    exit_code = 2

    def __init__(
        self,
        message: str,
        missing: Optional[List[str]] = None,
        line: Optional[int] = None,
    ) -> None:
        self.missing = missing or []
        self.line = line
        super().__init__(message, {"missing": self.missing, "line": line})


class InvalidFraction(BmsError):
    """Raised when a split fraction is not strictly between 0 and 1."""

    exit_code = 2


class TooFewSamples(BmsError):
    """Raised when a metric needs more samples than were provided."""

    exit_code = 2


class InvalidK(BmsError):
    """Raised when k-means is asked for an impossible number of clusters."""

    exit_code = 2


class ConfigError(BmsError):
    """Raised when a run configuration is invalid or inconsistent."""

    exit_code = 2


class KindMismatch(BmsError):
    """Raised when a checkpoint's model kind does not match the dataset kind."""

    exit_code = 2


class IndexOutOfRange(BmsError):
    """Raised when an example index does not exist in the dataset."""

    exit_code = 2


class VersionMismatch(BmsError):
    """Raised when a container has the wrong magic or format version."""

    exit_code = 4


class CorruptPayload(BmsError):
    """Raised when a container payload disagrees with its header."""

    exit_code = 4


class IoError(BmsError):
    """Raised when a file cannot be read or written."""

    exit_code = 5
