"""Exception hierarchy for heisgmt."""


class HeisError(Exception):
    """Base class for all library errors."""


class InvalidArgument(HeisError, ValueError):
    pass


class DegenerateGradient(HeisError):
    """Raised when a construction needs a nonvanishing horizontal gradient."""


class CharacteristicPoint(HeisError):
    """The horizontal normal is undefined because N^H vanishes.

    The offending magnitude of the horizontal projection is kept in
    ``magnitude`` so callers can report how close to characteristic the
    point was.
    """

    def __init__(self, message, magnitude=0.0):
        super().__init__(message)
        self.magnitude = float(magnitude)


class DegeneratePatch(HeisError):
    """The patch differential lost rank at a quadrature node."""


class DegenerateSlice(HeisError):
    pass


class CriticalLevel(HeisError):
    """A level straddles a grid cell where u o Phi is (numerically) flat."""


class CoverageError(HeisError):
    pass


class PreconditionViolated(HeisError):
    def __init__(self, message, bound=None):
        super().__init__(message)
        self.bound = bound


class InsufficientSampling(HeisError):
    pass


class InsufficientRange(HeisError):
    pass
