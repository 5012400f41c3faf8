"""Exception types shared across the platform."""

from __future__ import annotations


class EhcError(Exception):
    """Base class for every error raised by this package."""


class ConfigError(EhcError):
    """Configuration file missing, unreadable, or invalid."""


# --- ingest ---------------------------------------------------------------


class SourceUnavailable(EhcError):
    """Remote source could not be fetched (network failure or non-2xx status)."""


class CsvMalformed(EhcError):
    """CSV document is structurally broken (unbalanced quotes, ragged rows).

    ``line`` is the 1-based physical line of the document where the problem
    was detected; the header is line 1.
    """

    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


class SchemaMismatch(EhcError):
    """Table header does not match the expected schema."""


class DuplicateSortOrder(EhcError):
    """Two stories claim the same sort_order."""


class AllSourcesFailed(EhcError):
    """Every configured source failed to fetch during a sync."""


# --- geo ------------------------------------------------------------------


class MissingRegionId(EhcError):
    """GeoJSON feature lacks the configured region-id property."""


class DegenerateRing(EhcError):
    """Polygon ring has fewer than 4 vertices or is not closed."""


class DuplicateRegionId(EhcError):
    """Two boundary features share one region id."""


class UnknownRegion(EhcError):
    """A summary references a region absent from the boundary registry."""


# --- stats ----------------------------------------------------------------


class InsufficientData(EhcError):
    """Not enough readings (or coverage) to compute a statistic."""


class EmptyRegion(EhcError):
    """Region aggregation was asked to summarize zero deployments."""


class EmptyInput(EhcError):
    """Cross-region computation received an empty input map."""


# --- store ----------------------------------------------------------------


class StorageUnavailable(EhcError):
    """Snapshot storage root cannot be created, read, or written."""


class HashMismatch(EhcError):
    """Snapshot id does not match the hash of its own contents."""


class NoSnapshot(EhcError):
    """The store holds no published snapshot."""


class CorruptSnapshot(EhcError):
    """Stored snapshot failed integrity verification on read."""
