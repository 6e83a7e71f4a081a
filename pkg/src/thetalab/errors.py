"""Exception hierarchy shared by every module."""


class ThetaLabError(Exception):
    """Base class for all errors raised by this package."""


class InvalidDimensionError(ThetaLabError, ValueError):
    pass


class InvalidParameterError(ThetaLabError, ValueError):
    pass


class InvalidInputError(ThetaLabError, ValueError):
    pass


class NumericalFailureError(ThetaLabError, ArithmeticError):
    """An eigensolver or iterative method failed to converge.

    Carries the dimension of the offending problem and, when one could be
    computed, a condition-number estimate of the input.
    """

    def __init__(self, message, dimension=None, condition=None):
        super().__init__(message)
        self.dimension = dimension
        self.condition = condition


class DomainError(ThetaLabError, ValueError):
    """A transform was evaluated outside the set where it is defined.

    ``valid`` holds the admissible interval(s), when known.
    """

    def __init__(self, message, valid=None):
        super().__init__(message)
        self.valid = valid


class SolverFailureError(ThetaLabError, RuntimeError):
    """A bracketed root search found no sign change.

    ``samples`` holds (argument, value) pairs that were inspected.
    """

    def __init__(self, message, samples=None):
        super().__init__(message)
        self.samples = samples if samples is not None else []


class ConstraintViolationError(ThetaLabError, ValueError):
    """A matrix that should lie in the feasible set does not."""
