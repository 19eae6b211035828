"""Exception hierarchy shared across the package."""


class QtsmError(Exception):
    """Base class for all package-specific errors."""


class DimensionError(QtsmError, ValueError):
    """Inputs have mutually inconsistent shapes."""


class InvariantError(QtsmError, ValueError):
    """A model or problem invariant is violated.

    Carries the itemized failure messages so callers can report them.
    """

    def __init__(self, failures):
        self.failures = list(failures)
        super().__init__("; ".join(self.failures))


class NumericalError(QtsmError, ArithmeticError):
    """A numerical computation broke down (overflow, ill-conditioning, blow-up)."""


class IllConditionedError(NumericalError):
    """The fundamental matrix X(t) is numerically singular at some grid node."""

    def __init__(self, t, cond):
        self.t = t
        self.cond = cond
        super().__init__(
            f"ill-conditioned fundamental matrix at t={t:.6g} (cond ~ {cond:.3e})"
        )


class ExponentOverflowError(NumericalError):
    """An exponent exceeded the overflow guard before exponentiation."""

    def __init__(self, exponent, guard):
        self.exponent = exponent
        self.guard = guard
        super().__init__(
            f"exponent {exponent:.6g} exceeds overflow guard {guard:g}"
        )
