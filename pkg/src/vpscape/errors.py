"""Exception types shared across the toolkit."""


class VpscapeError(Exception):
    """Base class for all toolkit errors."""


class DegenerateInput(VpscapeError):
    """Input is geometrically degenerate (e.g. all points coincide)."""


class IdenticalLines(VpscapeError):
    """Two lines are identical up to scale; their intersection is undefined."""


class FormatError(VpscapeError):
    """A file does not match its documented format."""


class VersionMismatch(FormatError):
    """A versioned file carries an unsupported schema tag."""


class DimensionMismatch(VpscapeError):
    """Raster dimensions disagree with the sidecar metadata."""


class InsufficientEdges(VpscapeError):
    """Too few edges to sample minimal sets from."""


class DegenerateConfiguration(VpscapeError):
    """Hypothesis sampling exhausted its retries (e.g. all edges collinear)."""


class TooFewMembers(VpscapeError):
    """A cluster has too few member edges for the requested operation."""


class PointOutOfFrame(VpscapeError):
    """A pixel lies outside the declared image frame."""


class LevelMismatch(VpscapeError):
    """Two pyramid histograms have incompatible grid geometry."""


class DimensionMismatchFeature(VpscapeError):
    """Two semantic feature vectors have different dimensionality."""


class EmptyIndex(VpscapeError):
    """The retrieval index contains no records."""


class NoGroundTruth(VpscapeError):
    """An annotation provides no ground-truth edges."""


class SingleClass(VpscapeError):
    """ROC computation needs both positive and negative samples."""


class ConfigError(VpscapeError):
    """A configuration file or flag set is malformed."""

    def __init__(self, bad_keys, message=None):
        self.bad_keys = list(bad_keys)
        super().__init__(message or f"invalid config keys: {', '.join(self.bad_keys)}")
