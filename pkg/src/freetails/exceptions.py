"""Exception hierarchy.

Everything raised deliberately by the package derives from ``FreeTailsError``
so callers (and the CLI) can separate numerical failures from validation
problems.
"""


class FreeTailsError(Exception):
    """Base class for all package errors."""

    exit_code = 3


class ValidationError(FreeTailsError, ValueError):
    """Bad input: wrong shape, sign, domain or missing field."""

    exit_code = 2


class NumericalError(FreeTailsError, ArithmeticError):
    """A solver or quadrature did not reach its target."""

    exit_code = 3


# measure-level
class MomentDiverges(ValidationError):
    def __init__(self, order):
        super().__init__(f"moment of order {order} diverges")
        self.order = order


class NotNonneg(ValidationError):
    pass


# transforms
class DomainError(ValidationError):
    pass


class NumericalZero(NumericalError):
    pass


class NoConvergence(NumericalError):
    def __init__(self, msg, iterations=None, residual=None):
        super().__init__(msg)
        self.iterations = iterations
        self.residual = residual


class ConeViolation(NumericalError):
    pass


class OrderTooLarge(ValidationError):
    pass


class BranchCut(DomainError):
    pass


# Lévy–Khintchine data
class NotLevyMeasure(ValidationError):
    pass


class NegativeDrift(ValidationError):
    pass


class NotFreeRegular(ValidationError):
    pass


class GaussianPartPresent(ValidationError):
    pass


class NotRegularImage(ValidationError):
    pass


# convolution
class MeanZero(ValidationError):
    pass


class InversionFailure(NumericalError):
    pass


# inversion
class MassDeficit(NumericalError):
    def __init__(self, msg, mass=None):
        super().__init__(msg)
        self.mass = mass


class NegativeDensity(NumericalError):
    pass


class ContinuationStuck(NumericalError):
    pass


class NonNevanlinna(NumericalError):
    pass


# tails
class WindowTooShort(ValidationError):
    pass


class TailVanishes(NumericalError):
    pass


# rmt
class EigFailure(NumericalError):
    def __init__(self, msg, trial=None):
        super().__init__(msg)
        self.trial = trial
