"""Exception types shared across the package."""


class StormwatchError(Exception):
    """Base class for package-specific errors."""


class MalformedInputError(StormwatchError):
    """Input violates a structural precondition (dimension mismatch, missing signal kind, ...)."""


class InsufficientDataError(StormwatchError):
    """Not enough observations to carry out the computation."""


class UndefinedCorrelationError(StormwatchError):
    """Correlation undefined (zero variance / constant input)."""


class UndefinedStatisticError(StormwatchError):
    """Test statistic undefined for the given samples."""


class DataFormatError(StormwatchError):
    """A data file does not conform to its documented format."""

    def __init__(self, message: str, *, row: int | None = None, path: str | None = None):
        self.row = row
        self.path = path
        loc = ""
        if path is not None:
            loc += f" [{path}"
            loc += f", row {row}]" if row is not None else "]"
        elif row is not None:
            loc += f" [row {row}]"
        super().__init__(message + loc)


class ConflictError(StormwatchError):
    """State transition conflicts with the current state (e.g. deciding a decided candidate)."""


class NotFoundError(StormwatchError):
    """Referenced entity does not exist."""


class SearchError(StormwatchError):
    """Hyperparameter search could not produce a usable trial."""


class CampaignError(StormwatchError):
    """Campaign misconfiguration or an operation invalid for the campaign state."""


class PendingDecisionsError(CampaignError):
    """Iteration cannot be closed while candidates are still pending."""
