"""Exception types raised across the package."""


class ThistleError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(ThistleError):
    """Invalid or inconsistent configuration."""


class DimensionMismatchError(ThistleError):
    """Vector dimension does not match what the operation expects."""


class ZeroVectorError(ThistleError):
    """An all-zero vector was used where cosine distance is required."""


class DuplicateIdError(ThistleError):
    """A record id collides with one already stored (or within a batch)."""


class EmptyIndexError(ThistleError):
    """A query was issued against an index holding no records."""


class CorpusError(ThistleError):
    """A corpus file failed to parse; the message names the offending line."""


class SnapshotError(ThistleError):
    """A snapshot file could not be read or written."""


class SnapshotVersionError(SnapshotError):
    """Snapshot was written by an incompatible format version."""


class SnapshotTruncatedError(SnapshotError):
    """Snapshot file ends before its declared payload does."""


class SnapshotChecksumError(SnapshotError):
    """Snapshot payload does not match its stored checksum."""


class SidecarError(ThistleError):
    """The external embedding sidecar failed or produced unusable output."""
