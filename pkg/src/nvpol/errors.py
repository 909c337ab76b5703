"""Exception hierarchy for nvpol."""


class NvpolError(Exception):
    """Base class for every error raised by this package."""


class DistanceTooSmall(NvpolError, ValueError):
    pass


class NonFiniteInput(NvpolError, ValueError):
    pass


class ShellTooSmall(NvpolError, ValueError):
    pass


class OutOfRange(NvpolError, ValueError):
    pass


class LengthMismatch(NvpolError, ValueError):
    pass


class GridInvalid(NvpolError, ValueError):
    pass


class TooLarge(NvpolError, ValueError):
    """Dense evolution requested for more spins than the memory cap allows."""


class EmptySurface(NvpolError, ValueError):
    pass


class AllPointsExcluded(NvpolError, ValueError):
    """No grid point survives the |sin(omega t / 2)| floor."""


class NonPositiveOmega(NvpolError, ValueError):
    pass


class SoundnessViolation(NvpolError, AssertionError):
    """A lower bound exceeded the true mean polarization.

    This indicates an implementation bug, never a data condition.
    """


class ConfigError(NvpolError, ValueError):
    pass
