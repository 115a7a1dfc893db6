"""Exception hierarchy shared across the package.

Every domain failure derives from :class:`HsAssistError` so callers (CLI,
service) can map the whole family to one exit path while tests assert on the
specific class.
"""

from __future__ import annotations


class HsAssistError(Exception):
    """Base class for all domain errors raised by this package."""


class ParseError(HsAssistError):
    """A data file line could not be decoded or lacks required fields."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ValidationError(HsAssistError):
    """A parsed record violates a domain rule (bad code, empty text, ...)."""


class DuplicateHeadingError(HsAssistError):
    """The same heading appears more than once in the manual input."""


class EmptyEvidenceError(HsAssistError):
    """A knowledge-base entry resolved to zero manual sentences."""


class SplitError(HsAssistError):
    """Requested split sizes exceed the collection size."""


class EmptyCorpusError(HsAssistError):
    """An operation requiring a non-empty corpus received an empty one."""


class LabelCoverageError(HsAssistError):
    """A case label is absent from the model's label index."""


class EmptyDescriptionError(HsAssistError):
    """A goods description tokenized to nothing."""


class DimensionMismatchError(HsAssistError):
    """Two vectors of different lengths were combined."""


class EmptyKnowledgeBaseError(HsAssistError):
    """Neighborhood lookup over a knowledge base with no entries."""


class UnknownHeadingError(HsAssistError):
    """A heading has no entry in the loaded manual."""


class LengthMismatchError(HsAssistError):
    """Parallel prediction/gold sequences differ in length."""


class EmptyExpertSetError(HsAssistError):
    """Recall/precision requested against an empty expert evidence set."""


class EmptyGroupError(HsAssistError):
    """A difficulty group contains no cases."""


class DegenerateInputError(HsAssistError):
    """Regression input carries no variance to fit."""
