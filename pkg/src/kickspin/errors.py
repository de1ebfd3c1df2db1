"""Exception types shared by all modules."""


class KickspinError(Exception):
    """Base class; ``exit_code`` is what the CLI returns for it."""

    exit_code = 3


class InvalidArgument(KickspinError, ValueError):
    exit_code = 2


class NumericFailure(KickspinError, ArithmeticError):
    pass


class ContinuationFailure(NumericFailure):
    def __init__(self, message, lam=None):
        super().__init__(message)
        self.lam = lam


class DegenerateBranch(NumericFailure):
    pass


class UnsupportedModel(KickspinError):
    exit_code = 2


class NoSolution(NumericFailure):
    pass


class WindowError(KickspinError):
    exit_code = 2
