"""Exception types shared across the pipeline."""


class WikiguardError(Exception):
    """Base class for all library errors."""


class EventParseError(WikiguardError):
    """A JSONL record could not be decoded."""

    def __init__(self, message, line_no=None):
        self.line_no = line_no
        if line_no is not None:
            message = f"line {line_no}: {message}"
        super().__init__(message)


class EventValidationError(WikiguardError):
    """A decoded record violates the event schema."""

    def __init__(self, message, line_no=None):
        self.line_no = line_no
        if line_no is not None:
            message = f"line {line_no}: {message}"
        super().__init__(message)


class ScenarioError(WikiguardError):
    """Scenario construction is impossible for the given stream."""


class StreamOrderError(WikiguardError):
    """An event arrived out of timestamp order."""


class ConfigurationError(WikiguardError):
    """A resource file (lexicon, vector table) is missing or malformed."""


class CalibrationError(WikiguardError):
    """Cold-start calibration received no usable data."""


class DuplicateFeedbackError(WikiguardError):
    """Feedback was already recorded for this event."""


class UnknownEventError(WikiguardError):
    """No prediction exists for the referenced event."""


class UnsupportedModelError(WikiguardError):
    """The operation requires a tree-based model."""
