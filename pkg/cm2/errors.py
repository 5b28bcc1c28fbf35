"""Exception hierarchy for cm2."""

from typing import Optional


class CM2Error(Exception):
    """Base class for every error raised by cm2."""


class InputError(CM2Error, ValueError):
    """Invalid arguments or violated preconditions."""


class ParseError(CM2Error):
    """Malformed input document or keyword file."""

    def __init__(self, message: str, line: Optional[int] = None, column: Optional[int] = None):
        self.line = line
        self.column = column
        if line is not None:
            where = f"line {line}" if column is None else f"line {line}, column {column}"
            message = f"{message} ({where})"
        super().__init__(message)


class SchemaError(ParseError):
    """Well-formed XML that does not follow the expected schema."""


class BoundsError(ParseError):
    """A word lies outside its page box."""


class FormatError(ParseError):
    """A CSV record has the wrong shape."""

    def __init__(self, message: str, record: Optional[int] = None):
        self.record = record
        if record is not None:
            message = f"record {record}: {message}"
        super().__init__(message)


class DuplicateKeywordError(FormatError):
    """Two records normalize to the same keyword."""


class ValidationError(FormatError):
    """A record is well-formed but its content is unusable."""


class TrainingError(CM2Error):
    """A keyword could not be located in its own training sample."""

    def __init__(self, class_id: str, keyword: str):
        self.class_id = class_id
        self.keyword = keyword
        super().__init__(f"keyword {keyword!r} not found in training sample of class {class_id!r}")


class RegistryError(CM2Error):
    """A registry file could not be loaded."""

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class GenerationError(CM2Error):
    """The synthetic corpus layout is infeasible."""
