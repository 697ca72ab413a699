"""Exception hierarchy.

Every error raised by the package derives from :class:`EntcontError`, which is
itself a ``ValueError`` so callers validating user input can catch either.
"""


class EntcontError(ValueError):
    pass


class NotSquare(EntcontError):
    pass


class NotHermitian(EntcontError):
    pass


class NegativeSpectrum(EntcontError):
    pass


class NotUnitary(EntcontError):
    pass


class DimensionMismatch(EntcontError):
    pass


class InvalidState(EntcontError):
    pass


class InvalidDistribution(EntcontError):
    pass


class OutOfDomain(EntcontError):
    pass


class RefTooSmall(EntcontError):
    pass


class AmplitudeOutOfRange(EntcontError):
    pass


class WrongDimensions(EntcontError):
    pass


class DimensionCap(EntcontError):
    pass


class RegimeViolation(EntcontError):
    pass


class EpsilonOutOfRange(EntcontError):
    pass


class ProviderUnavailable(EntcontError):
    pass


class ParseError(EntcontError):
    pass


class InvalidConfig(EntcontError):
    pass
