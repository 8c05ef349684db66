"""Exception types shared across the library."""


class StiefelStatsError(Exception):
    """Base class for all library errors."""


class InvalidMatrix(StiefelStatsError):
    """Input matrix has non-finite entries or an unusable shape."""


class SingularSystem(StiefelStatsError):
    """Linear system is singular beyond the conditioning threshold."""


class RankDeficient(StiefelStatsError):
    """Matrix does not have full column rank."""


class OutOfNeighborhood(StiefelStatsError):
    """Point pair is outside the chart where the lifting map is defined."""


class CutLocus(StiefelStatsError):
    """Subspaces are orthogonal; the horizontal log does not exist."""


class ScaleTooLarge(StiefelStatsError):
    """Requested scale puts essentially no mass inside the support ball."""


class InsufficientData(StiefelStatsError):
    """Too few samples for the requested statistic."""


class BundleFormatError(StiefelStatsError):
    """Matrix bundle file is malformed."""
