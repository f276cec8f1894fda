"""Exception hierarchy shared across the package.

The CLI maps these onto process exit codes, so raise the most specific
class that applies.
"""


class QKClassError(Exception):
    """Base class for all errors raised by this package."""


class DataError(QKClassError):
    """Invalid user-supplied data: bad labels, malformed files, zero vectors,
    weight vectors that are not distributions, and similar."""


class DimensionError(QKClassError):
    """Incompatible register or matrix dimensions, or the hard dimension cap
    (2**20) was exceeded."""


class NumericError(QKClassError):
    """A numerical invariant failed: non-Hermitian input, a trace that should
    be real, a Gram matrix that is not PSD, a solver that did not converge."""
