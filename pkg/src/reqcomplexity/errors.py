"""Exception hierarchy. Each class maps onto one CLI exit code."""


class ComplexityError(Exception):
    exit_code = 1


class UsageError(ComplexityError, ValueError):
    """Bad arguments: unknown metric names, too few rows, bad options."""

    exit_code = 2


class ValidationError(ComplexityError, ValueError):
    """Input violates a structural invariant (duplicate ids, self-loops, ...)."""

    exit_code = 3

    def __init__(self, message, problems=()):
        super().__init__(message)
        self.problems = list(problems)


class DomainError(ComplexityError, ArithmeticError):
    """A quantity is undefined for the given input (zero variance, empty graph)."""

    exit_code = 4
