"""Exception types raised across the tracking engine."""


class OvmotError(Exception):
    """Base class for all engine errors."""


class EmptyHistory(OvmotError):
    """A serialization or prediction was requested for a track with no history."""


class InsufficientHistory(OvmotError):
    """Pair mining needs at least one ground-truth box before the anchor frame."""


class ScorerUnavailable(OvmotError):
    """The remote scoring service could not be reached (after one retry)."""


class MalformedResponse(OvmotError):
    """The scoring service answered with an invalid or out-of-contract payload."""


class MissingScore(OvmotError):
    """A candidate pair reached cost construction without a score."""


class SizeExceeded(OvmotError):
    """The brute-force assignment oracle was asked for a matrix above its cap."""


class NonMonotonicFrame(OvmotError):
    """Tracker stepped with a frame index not greater than the previous one."""


class ParseError(OvmotError):
    """A scene file failed validation; the message names the offending field."""


class SchemaVersionMismatch(OvmotError):
    """A scene file declares a schema version this engine does not read."""


class EmptyGroundTruth(OvmotError):
    """Evaluation over a sequence with zero ground-truth boxes is undefined."""
