"""Exception hierarchy shared by all modules."""


class SmallBallError(Exception):
    """Base class for every error raised by this package."""


class ResolutionError(SmallBallError, ValueError):
    """The grid is too coarse to resolve a Haar function exactly."""


class GridTooLargeError(SmallBallError):
    """A grid would exceed the configured cell budget."""


class ShapeMismatchError(SmallBallError, ValueError):
    """Two grid functions do not live on the same grid."""


class ModeError(SmallBallError, TypeError):
    """Incompatible scalar modes were combined without explicit promotion."""


class SignFileError(SmallBallError, ValueError):
    """A sign file or sign assignment is malformed."""


class InvalidBlockError(SmallBallError, IndexError):
    """A block index is outside 1..q."""


class ParameterError(SmallBallError, ValueError):
    """Riesz parameters are out of range."""


class DegenerateQError(ParameterError):
    """The formulaic block count is zero and no override was supplied."""


class InstanceTooLargeError(SmallBallError):
    """A search instance exceeds its hard cap."""
