"""Exception hierarchy.

Every error carries a stable machine-parsable ``token`` that the CLI
prints to stderr as ``error: <token>: <message>``.
"""


class TagmoodError(Exception):
    """Base class for all domain errors."""

    token = "error"


class ConfigurationError(TagmoodError):
    token = "configuration"


class SchemaError(TagmoodError):
    """Malformed or invalid input file content."""

    token = "schema"


class EmptyCorpusError(TagmoodError):
    token = "empty-corpus"


class DegenerateTermError(TagmoodError):
    token = "degenerate-term"


class EmptyQueryError(TagmoodError):
    token = "empty-query"


class ParameterError(TagmoodError):
    token = "parameter"


class InsufficientAnchorError(TagmoodError):
    token = "insufficient-anchor"


class EmptyCandidateError(TagmoodError):
    token = "empty-candidate"


class SampleSizeError(TagmoodError):
    token = "sample-size"


class ScheduleError(TagmoodError):
    token = "schedule"


class CoverageError(TagmoodError):
    token = "coverage"


class UndefinedCorrelationError(TagmoodError):
    token = "undefined-correlation"


class UndefinedAlphaError(TagmoodError):
    token = "undefined-alpha"


class NothingToAblateError(TagmoodError):
    token = "nothing-to-ablate"
