"""Exception hierarchy shared across the package.

Validation problems (bad config, malformed observations) are kept apart
from usage errors (stepping a finished episode) and from checkpoint file
problems, because the CLI maps them to different exit codes.
"""


class GaterlError(Exception):
    """Base class for all package-specific errors."""


class ValidationError(GaterlError):
    """A value or configuration violates a documented invariant."""

    def __init__(self, violations):
        if isinstance(violations, str):
            violations = [violations]
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


class UsageError(GaterlError):
    """An operation was called in a state where it is not defined."""


class NumericError(GaterlError):
    """A non-finite value showed up where the math requires finiteness."""


class TrainingAbort(GaterlError):
    """Training stopped because losses stayed non-finite."""


class CheckpointError(GaterlError):
    """Base class for checkpoint load failures."""


class CheckpointCorruptError(CheckpointError):
    """File is unreadable, truncated, or not valid checkpoint JSON."""


class CheckpointVersionError(CheckpointError):
    """Checkpoint format version is not supported."""


class CheckpointDimensionError(CheckpointError):
    """Stored parameter shapes do not match the declared dimensions."""


class ConfigurationError(GaterlError):
    """Service configuration is missing something a request needs."""


class NotFoundError(GaterlError):
    """Referenced session does not exist."""


class SessionExpiredError(GaterlError):
    """Session idled past its expiry window."""


class OrderingError(GaterlError):
    """Event timestamp is older than the session's last activity."""


class SequencingError(GaterlError):
    """Answer was submitted for a question that is not unlocked yet."""


class GateClosedError(GaterlError):
    """Chat was requested while the AI gate is closed."""


class UpstreamError(GaterlError):
    """External chat backend failed or timed out."""

    def __init__(self, detail, retry_after_seconds=5):
        self.retry_after_seconds = retry_after_seconds
        super().__init__(detail)
