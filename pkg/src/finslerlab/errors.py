"""Exception hierarchy shared by all finslerlab modules."""


class FinslerError(Exception):
    """Base class for library errors."""


class InvalidInputError(FinslerError, ValueError):
    """Malformed argument: empty matrix, bad parameter, too few samples."""


class DomainError(FinslerError, ValueError):
    """A point lies outside (or too close to the boundary of) a factor domain."""


class ZeroSectionError(FinslerError, ValueError):
    """Operation needs a nonzero tangent vector."""


class SingularUpdateError(FinslerError, ArithmeticError):
    """Rank-1 corrected matrix is not invertible."""


class SingularTensorError(FinslerError, ArithmeticError):
    """A fundamental tensor failed its positive-definiteness check."""


class BoundaryExitError(FinslerError):
    """Geodesic integration left the domain.

    ``path`` holds the samples computed before the exit.
    """

    def __init__(self, message, path=None):
        super().__init__(message)
        self.path = path


class ConfigError(FinslerError):
    """Invalid run manifest or CLI configuration."""
