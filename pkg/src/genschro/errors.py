"""Exception and warning types raised by genschro."""


class GenSchroError(Exception):
    """Base class for all library errors."""


class ConfigurationError(GenSchroError, ValueError):
    """Invalid grid, profile, or scenario configuration."""

    def __init__(self, message, line=None, key=None):
        self.line = line
        self.key = key
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class TableRangeError(GenSchroError, ValueError):
    """A tabulated profile was queried outside its tabulated range."""


class SingularCoefficientError(GenSchroError, ValueError):
    """1 + mu vanishes on a grid node."""

    def __init__(self, node, x):
        self.node = node
        self.x = x
        super().__init__(f"1 + mu(x) vanishes at node {node} (x = {x:.17g})")


class SolverError(GenSchroError, RuntimeError):
    """A banded factorization is singular or numerically ill-conditioned."""

    def __init__(self, message, condition=None):
        self.condition = condition
        if condition is not None:
            message = f"{message} (condition estimate {condition:.3e})"
        super().__init__(message)


class EvolutionError(GenSchroError, FloatingPointError):
    """Non-finite values appeared during time stepping."""

    def __init__(self, step, message="non-finite field values"):
        self.step = step
        super().__init__(f"{message} at step {step}")


class DegenerateNormalizationError(GenSchroError, ZeroDivisionError):
    """Total probability of the initial record is zero."""


class ConvergenceError(GenSchroError, RuntimeError):
    """An iterative eigensolver exhausted its iteration budget."""

    def __init__(self, message, best_residual):
        self.best_residual = best_residual
        super().__init__(f"{message} (best residual {best_residual:.3e})")


class UsageError(GenSchroError, ValueError):
    """Arguments are individually valid but mutually inconsistent."""


class BoundaryWarning(UserWarning):
    """A field has non-negligible amplitude near the Dirichlet boundary."""


class DefectiveEigenpairWarning(UserWarning):
    """An eigenpair is close to defective (large eigenvalue condition number)."""
