"""Exception and warning types raised by spincs."""


class SpinCSError(Exception):
    """Base class for all spincs errors."""


class SpinMismatch(SpinCSError, ValueError):
    pass


class AngleAtPole(SpinCSError, ValueError):
    """Gaussian parameters do not exist at theta = pi."""


class SingularReducedSystem(SpinCSError, ArithmeticError):
    """The gauge-reduced canonical system cannot be solved."""

    def __init__(self, message, t=None):
        if t is not None:
            message = f"{message} (t = {t!r})"
        super().__init__(message)
        self.t = t


class InconsistentSystem(SpinCSError, ArithmeticError):
    """The canonical equations have no solution for the chosen gauge."""

    def __init__(self, message, residual=None, t=None):
        if t is not None:
            message = f"{message} (t = {t!r})"
        super().__init__(message)
        self.residual = residual
        self.t = t


class NoCyclicSolution(SpinCSError, ValueError):
    pass


class TooFewNodes(SpinCSError, ValueError):
    pass


class ChartViolation(SpinCSError, ValueError):
    pass


class UnknownCase(SpinCSError, ValueError):
    pass


class GimbalDegenerate(UserWarning):
    """Only a sum or difference of the outer Euler angles is determined."""
