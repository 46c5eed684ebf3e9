"""Exception types shared across the package."""


class XimaxError(Exception):
    """Base class for statistical precondition failures."""


class SampleTooSmall(XimaxError):
    """Fewer observations than the method supports."""


class TiesPresent(XimaxError):
    """A column contains duplicate values and the tie policy forbids them."""


class DegenerateColumn(XimaxError):
    """A column is entirely constant, so ranks carry no information."""


class BlockTooLarge(XimaxError):
    """Requested block length leaves no complete block."""


class DegenerateVariance(XimaxError):
    """Empirical studentization hit a zero second moment."""


class EmptySubset(XimaxError):
    """A hypothesis subset with no members was requested."""


class NotPositiveDefinite(XimaxError):
    """A requested covariance matrix has no Cholesky factor."""


class BadTau(XimaxError):
    """Noise correlation parameter outside the valid range."""
