"""Exception hierarchy shared by all modules."""


class GGCMixError(Exception):
    """Base class for library errors."""


class DomainError(GGCMixError, ValueError):
    """Argument outside the mathematical domain of an operation."""


class ExtrapolationError(DomainError):
    """Table density queried outside its grid."""


class IntegrabilityError(GGCMixError, ValueError):
    """A density, tilt or Thorin measure fails to be integrable."""


class NormalizationError(GGCMixError, ValueError):
    """A density does not integrate to one."""


class QuadratureError(GGCMixError, RuntimeError):
    """Numerical integration failed to reach its error target."""


class UnsupportedSamplerError(GGCMixError, NotImplementedError):
    """No sampler is available for the requested density."""


class SplitSupportError(GGCMixError, ValueError):
    """Density vanishes inside its support interval."""


class PrecisionError(GGCMixError, ArithmeticError):
    """Cancellation in a difference exceeded the working mantissa."""

    def __init__(self, message, bits_needed=None):
        super().__init__(message)
        self.bits_needed = bits_needed


class BranchError(GGCMixError, ValueError):
    """Square root argument of a closed form left the real branch."""


class DegenerateError(GGCMixError, ValueError):
    """Construction produced a zero-mass object."""


class HorizonError(GGCMixError, ValueError):
    """Simulation horizon too short for the exponential tail to be negligible."""

    def __init__(self, message, suggested=None):
        super().__init__(message)
        self.suggested = suggested


class CatalogError(GGCMixError, KeyError):
    """Unknown catalog entry."""
