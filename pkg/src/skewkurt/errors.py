"""Exception hierarchy shared by all skewkurt modules."""


class SkewKurtError(Exception):
    """Base class for all library errors."""


class InvalidParameterError(SkewKurtError):
    """A distribution, block-size or configuration parameter is out of range."""


class EmptySampleError(SkewKurtError):
    """A block or series contains no values."""


class NonFiniteValueError(SkewKurtError):
    """Input contains NaN or infinity."""


class DegenerateBlockError(SkewKurtError):
    """Operation requires a non-degenerate block (m2 > 0)."""


class SeriesError(SkewKurtError):
    """Series ingestion or partitioning failed."""


class InsufficientDataError(SkewKurtError):
    """Not enough rows/scales/bins to run the requested estimate."""


class SkewRangeError(SkewKurtError):
    """Skewness outside the admissible range, or no envelope for this n."""
