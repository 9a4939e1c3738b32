"""Exception hierarchy.

Everything raised on purpose derives from :class:`GibbsTestError`.  Input
problems additionally derive from :class:`ValueError`; numerical failures
from :class:`ArithmeticError`.  The CLI maps these two branches (plus
:class:`TooLarge`) to distinct exit codes.
"""


class GibbsTestError(Exception):
    pass


class InputError(GibbsTestError, ValueError):
    pass


class NumericError(GibbsTestError, ArithmeticError):
    pass


class NotStochastic(InputError):
    pass


class ReducibleChain(InputError):
    pass


class DimensionMismatch(InputError):
    pass


class WordTooShort(InputError):
    pass


class DegenerateHypotheses(InputError):
    pass


class InvalidAlternative(InputError):
    pass


class LambdaOutOfRange(InputError):
    pass


class SlopeOutOfRange(InputError):
    pass


class NoCrossing(InputError):
    """The mixed-Jacobian functions ``g_0`` and ``g_1`` do not cross on [0, 1]."""


class NoConvergence(NumericError):
    pass


class IdentityViolation(NumericError):
    def __init__(self, message, residual):
        super().__init__(f"{message} (residual {residual:.3e})")
        self.residual = residual


class TooLarge(GibbsTestError):
    """Exact enumeration would exceed the word-count cap."""


class AllZeroCounts(GibbsTestError):
    """Every Monte-Carlo replica avoided the error event at some n."""
