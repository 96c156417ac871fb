"""Exception types raised by the library.

Errors that describe an impossible mathematical request (a rank outside the
allowed range, an element outside an invariant ring, ...) derive from
:class:`MathDomainError`; the command line maps those to exit status 2.
"""


class MathDomainError(ValueError):
    """Base class for requests that make no sense mathematically."""


class InvalidRank(MathDomainError):
    """The rank is outside the allowed range for the root system type."""


class GroupTooLarge(MathDomainError):
    """The Weyl group exceeds the configured enumeration cap."""


class TruncationExceeded(MathDomainError):
    """A truncated power-series operation would need more precision than kept."""


class UnclassifiedType(MathDomainError):
    """No closedness classification is known for this root system type."""


class WrongType(MathDomainError):
    """The operation is only defined for a specific root system type."""


class NotParabolicInvariant(MathDomainError):
    """An element expected to be W_P-invariant is not."""


class VertexModuleViolation(MathDomainError):
    """A section value does not lie in the module attached to its vertex."""


class UnsupportedLaw(MathDomainError):
    """The operation is not available for this formal group law."""


class IndexMismatch(MathDomainError):
    """A tuple is indexed by the wrong set of coset representatives."""
