"""Exception types raised by chiralmag."""


class ChiralMagError(Exception):
    """Base class for all package errors."""


class DomainError(ChiralMagError, ValueError):
    """Parameters outside the admissible domain of an operation."""


class CapacityError(ChiralMagError):
    """An enumeration would exceed its configured size limit."""


class SizeError(ChiralMagError, ValueError):
    """Grid size is not odd or does not match."""


class IncompatibleLattice(ChiralMagError, ValueError):
    """The requested field is not periodic on the given lattice."""


class ZeroAmplitude(DomainError):
    """Requested state degenerates to the trivial state m = 0."""


class SymmetryMismatch(ChiralMagError, ValueError):
    """Isotropy subgroup not available on the given lattice class."""


class FixedPointFailure(ChiralMagError):
    """Inner fixed-point iteration did not converge.

    ``partial`` carries whatever the caller managed to compute before the
    failure (for :func:`chiralmag.flow.run` this is a partial FlowResult).
    """

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial
