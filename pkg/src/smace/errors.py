"""Exception hierarchy shared across the package."""


class SmaceError(Exception):
    """Base class for all errors raised by this package."""


class DimensionError(SmaceError):
    """A vector or matrix has the wrong length/shape for the system."""


class UnknownFeature(SmaceError):
    """A feature name or id is not part of the system."""


class UnscaledFeature(SmaceError):
    """A feature is known to the system but has no fitted scaling bounds."""


class ModelEvaluationError(SmaceError):
    """A model backend failed or produced a non-finite prediction."""


class ExternalModelError(ModelEvaluationError):
    """An external model subprocess failed."""


class ExternalTimeoutError(ExternalModelError):
    """The external model did not answer within its deadline."""


class ProtocolError(ExternalModelError):
    """The external model violated the line-delimited JSON protocol."""


class NonZeroExitError(ExternalModelError):
    """The external model process exited with a non-zero status."""


class TooManyFeatures(SmaceError):
    """Exact subset enumeration was requested beyond its size budget."""


class BackendMismatch(SmaceError):
    """An operation requires a different model backend type."""


class RuleNotInPolicy(SmaceError):
    """The requested rule does not belong to the system's policy."""


class ConfigError(SmaceError):
    """A system configuration document is malformed."""


class DatasetParseError(SmaceError):
    """A dataset file could not be parsed."""

    def __init__(self, message: str, row: int | None = None, column: int | None = None):
        self.row = row
        self.column = column
        if row is not None:
            message = f"{message} (row {row}" + (f", column {column})" if column is not None else ")")
        super().__init__(message)


class NonNumericCell(DatasetParseError):
    """A dataset cell does not hold a number."""
