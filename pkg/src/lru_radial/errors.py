"""Exception types raised by the analysis engine.

Every validation error carries a ``field`` attribute naming the offending
input, which the command-line front end uses in its diagnostics.
"""


class ModelError(ValueError):
    """Base class for invalid inputs to any engine operation."""

    field = "input"

    def __init__(self, message, field=None):
        super().__init__(message)
        if field is not None:
            self.field = field


class NonPositiveEntry(ModelError):
    field = "probs"


class BadLength(ModelError):
    field = "probs"


class SumOutOfTolerance(ModelError):
    field = "probs"


class BadCapacity(ModelError):
    field = "capacity"


class CapacityFull(ModelError):
    """Raised by formulas that are only defined for ``capacity < n_items``."""

    field = "capacity"


class ThetaOutOfRange(ModelError):
    field = "theta"


class MOutOfRange(ModelError):
    field = "m"


class BadExponent(ModelError):
    field = "exponent"


class TooManyItems(ModelError):
    field = "n_items"


class TooManyItemsForOracle(TooManyItems):
    pass


class BadPair(ModelError):
    field = "pair"


class RankOutOfRange(ModelError):
    field = "r"


class ProbOutOfRange(ModelError):
    field = "success_probs"


class NotAPermutation(ModelError):
    field = "sigma"


class NonPositiveRate(ModelError):
    field = "rates"


class QuadratureNotConverged(ArithmeticError):
    """Successive order doublings kept disagreeing beyond the tolerance."""


class NonPositiveKernel(AssertionError):
    """A pair kernel came out nonpositive; this is an implementation bug."""


class ConditioningWarning(UserWarning):
    """Some probability is so small that 1/p_R**2 terms lose accuracy."""
