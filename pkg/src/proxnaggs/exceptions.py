"""Exception types raised across the package."""


class InputError(ValueError):
    """Malformed or inconsistent input (shapes, bounds, empty data)."""


class ConfigurationError(ValueError):
    """Solver or command configuration violates a precondition."""


class NumericalFailure(ArithmeticError):
    """A solver produced a non-finite quantity."""

    def __init__(self, message, k):
        super().__init__(f"{message} (iteration {k})")
        self.k = k


class ReferenceFailure(RuntimeError):
    """The reference solver hit its iteration cap before the tolerance."""

    def __init__(self, best_residual, iterations):
        super().__init__(
            f"reference solve stopped after {iterations} iterations "
            f"with residual {best_residual:.3e}"
        )
        self.best_residual = best_residual
        self.iterations = iterations


class DegenerateIntervalError(ValueError):
    """The admissible interval for the Lyapunov weight ``c`` is empty."""


class ParseError(ValueError):
    """A data file could not be parsed.

    ``offset`` is a byte offset for binary files, ``line`` a 1-based line
    number for text files.
    """

    def __init__(self, message, offset=None, line=None):
        where = ""
        if offset is not None:
            where = f" at byte offset {offset}"
        elif line is not None:
            where = f" at line {line}"
        super().__init__(message + where)
        self.offset = offset
        self.line = line
