"""Exception types shared across the toolkit."""


class T2SError(Exception):
    """Base class for all toolkit errors."""


class ParseError(T2SError):
    """A catalog or fixture file is structurally malformed."""


class IntegrityError(T2SError):
    """A catalog violates referential or uniqueness constraints."""


class EmptyQuestion(T2SError):
    """Serialization was asked to encode an empty question."""


class UnknownEntity(T2SError):
    """A description references a table or column absent from the catalog."""


class DbUnavailable(T2SError):
    """The backing SQLite database file cannot be opened."""


class SqlSyntaxError(T2SError):
    """SQL text does not conform to the supported dialect.

    ``span`` is the (start, end) character range of the offending token
    when known.
    """

    def __init__(self, message: str, span: tuple[int, int] | None = None):
        super().__init__(message)
        self.span = span


class ResolutionError(T2SError):
    """A table, column, or alias in a query does not resolve against the schema."""

    def __init__(self, name: str, message: str | None = None):
        super().__init__(message or f"cannot resolve {name!r}")
        self.name = name


class GoldParseError(T2SError):
    """A gold query failed to parse; the corpus itself is defective."""


class ConfigAfterFeed(T2SError):
    """Checker configuration was changed after feeding began."""


class AlignmentError(T2SError):
    """Predictions and examples differ in length or ordering."""


class NotAFailure(T2SError):
    """Triage was handed a (gold, pred) pair that is actually correct."""
