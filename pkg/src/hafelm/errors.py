"""Exception hierarchy. CLI exit codes: ConfigError 2, DataError 3, NumericError 4."""


class HafelmError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(HafelmError):
    """Invalid parameter combination or value."""


class DataError(HafelmError):
    """Malformed, inconsistent, or unusable input data."""


class ParseError(DataError):
    """File could not be parsed; message names the offending 1-based line."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class EmptyInputError(DataError):
    """Input contained no usable rows."""


class DegenerateSplitError(DataError):
    """Requested split would leave one side empty or is otherwise impossible."""


class EmptyClassError(DataError):
    """A class referenced by index has no samples."""


class AlignmentError(DataError):
    """Sequences that must align by index have mismatched lengths."""


class ShapeError(DataError):
    """Array dimensions do not match what the operation requires."""


class EmptyDocumentError(DataError):
    """No token of the document is in the word-vector vocabulary."""

    def __init__(self, message, oov_tokens=()):
        super().__init__(message)
        self.oov_tokens = list(oov_tokens)


class DegenerateProjectionError(DataError):
    """All samples identical; no principal directions exist."""


class MembershipRangeError(DataError):
    """A membership value falls outside (0, 1]."""


class NumericError(HafelmError):
    """A linear solve or floating-point computation produced non-finite results."""


class SearchError(NumericError):
    """Every grid-search cell failed; no usable configuration found."""
