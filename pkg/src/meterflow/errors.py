"""Exception types shared across the engine."""


class MeterFlowError(Exception):
    """Base class for all engine errors."""


class ValidationError(MeterFlowError):
    """Input violates a domain invariant (negative consumption, bad range, ...)."""


class AlignmentError(ValidationError):
    """Timestamp is not aligned to an exact hour boundary."""


class NotFoundError(MeterFlowError):
    """Requested meter / neighborhood / resource does not exist."""


class DuplicateError(MeterFlowError):
    """(meter_id, read_time) already present and upsert is disabled."""


class PrivacyError(MeterFlowError):
    """Operation would expose data attributable to too few customers."""


class InsufficientDataError(MeterFlowError):
    """Not enough observations to fit or evaluate a model."""


class SingularFitError(MeterFlowError):
    """Regression design matrix is rank deficient."""

    def __init__(self, message: str, season: int | None = None):
        super().__init__(message)
        self.season = season


class DegenerateModelError(MeterFlowError):
    """Model has collapsed (zero variance) and cannot score new points."""


class DependencyError(MeterFlowError):
    """A required upstream model or stage is missing."""

    def __init__(self, message: str, stage: str | None = None):
        super().__init__(message)
        self.stage = stage


class ParseError(MeterFlowError):
    """Malformed input file row."""

    def __init__(self, message: str, line: int | None = None):
        super().__init__(message)
        self.line = line


class ConfigError(MeterFlowError):
    """Invalid configuration (workflow definition, generator spec, ...)."""
