"""Exception types raised across the package.

Every error derives from :class:`FracResetError` so callers (notably the
CLI) can catch the whole family in one place.
"""


class FracResetError(Exception):
    """Base class for all package errors."""


# numcore
class NonSquare(FracResetError, ValueError):
    pass


class ConvergenceFailure(FracResetError, ArithmeticError):
    pass


class BranchCutViolation(FracResetError, ArithmeticError):
    pass


class IllConditionedEigenbasis(FracResetError, ArithmeticError):
    pass


class SingularLyapunovOperator(FracResetError, ArithmeticError):
    pass


class PoleHit(FracResetError, ZeroDivisionError):
    pass


# fode
class InvalidOrder(FracResetError, ValueError):
    pass


class HistoryMismatch(FracResetError, ValueError):
    pass


class IndexOutOfRange(FracResetError, IndexError):
    pass


# models
class NonReciprocalOrder(FracResetError, ValueError):
    pass


class AlreadyFractional(FracResetError, ValueError):
    pass


class OrderMismatch(FracResetError, ValueError):
    pass


class DimensionMismatch(FracResetError, ValueError):
    pass


# simreset
class Divergence(FracResetError, ArithmeticError):
    """Raised when the state blows up; ``trajectory`` holds the partial run."""

    def __init__(self, message, trajectory=None):
        super().__init__(message)
        self.trajectory = trajectory


class EmptyTrajectory(FracResetError, ValueError):
    pass


# describing
class NotPeriodic(FracResetError, ArithmeticError):
    pass


# stability
class UnstableFlow(FracResetError, ArithmeticError):
    pass


class NonHurwitzDenominator(FracResetError, ValueError):
    pass


class ImproperTransferFunction(FracResetError, ValueError):
    pass


# cli
class SchemaViolation(FracResetError, ValueError):
    pass
