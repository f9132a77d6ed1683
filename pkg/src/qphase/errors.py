"""Exception hierarchy shared by all modules."""


class QPhaseError(Exception):
    """Base class for every error raised by this package."""


class InvalidArgument(QPhaseError, ValueError):
    pass


class InvalidGate(InvalidArgument):
    """Gate matrix is not unitary or has the wrong shape."""


class InvalidPattern(InvalidArgument):
    """Occupancy pattern is not valid for the statistics family."""


class NumericalError(QPhaseError, ArithmeticError):
    """A numerical invariant (normalization, finiteness) was violated."""


class DegenerateMeasurement(NumericalError):
    """A projective measurement selected a branch of (numerically) zero norm."""


class UncorrectableSyndrome(QPhaseError):
    """Syndrome has no entry in the code's correction table."""


class ConfigError(QPhaseError):
    def __init__(self, path, message):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)
