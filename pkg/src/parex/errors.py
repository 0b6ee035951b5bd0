"""Exception types raised by parex."""


class ParexError(Exception):
    """Base class for all parex errors."""


class InvalidDegreeError(ParexError, ValueError):
    pass


class DegenerateIntervalError(ParexError, ValueError):
    pass


class NonPositiveDiffusionError(ParexError, ValueError):
    pass


class SingularMatrixError(ParexError, ArithmeticError):
    pass


class InvalidOrderError(ParexError, ValueError):
    pass


class IllConditionedTableauError(ParexError, ArithmeticError):
    pass


class SingularCollocationError(ParexError, ValueError):
    pass


class OutOfIntervalError(ParexError, ValueError):
    pass


class OracleNotConvergedError(ParexError, RuntimeError):
    """The reference solution changed too much between its two finest levels."""

    def __init__(self, gap, error):
        self.gap = gap
        self.error = error
        super().__init__(
            f"oracle gap {gap:.3e} exceeds 1% of the measured error {error:.3e}"
        )
