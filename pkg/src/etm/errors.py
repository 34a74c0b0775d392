"""Exception types shared across the package."""


class EtmError(Exception):
    """Base class for every error raised by this package."""


class ParseError(EtmError):
    """SQL text could not be parsed by the tree parser."""

    def __init__(self, position: int, message: str):
        super().__init__(f"parse error at position {position}: {message}")
        self.position = position
        self.message = message


class SchemaError(EtmError):
    """Schema document is malformed or internally inconsistent."""


class UnknownTable(SchemaError):
    """A table name does not exist in the schema."""


class UnknownColumn(SchemaError):
    """A column name does not exist in its table."""


class ResolutionError(EtmError):
    """A column reference is ambiguous or cannot be resolved in scope."""


class RewriteDivergence(EtmError):
    """Rewriting failed to reach a fixpoint within the sweep cap."""


class UnknownRule(EtmError):
    """A rule id outside the catalog was requested."""


class GenError(EtmError):
    """Random instance generation cannot satisfy the schema constraints."""


class ExecError(EtmError):
    """Query execution failed.

    kind is one of 'syntax', 'runtime', 'timeout'.
    """

    def __init__(self, kind: str, message: str):
        super().__init__(f"execution error ({kind}): {message}")
        self.kind = kind


class EsmParseError(EtmError):
    """The legacy set matcher could not parse a query (by design it rejects
    several constructs the tree parser accepts)."""


class AlignmentError(EtmError):
    """Gold/prediction/label files do not have matching line counts."""
