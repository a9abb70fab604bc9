"""Exception hierarchy for the engine.

Grouped by how the command-line driver maps them to exit codes:
``InputError`` subclasses mean the input was rejected (exit 2),
``ConsistencyError`` subclasses mean two computation paths that must agree
did not (exit 3), and ``VerificationFailure`` subclasses mean a declared
invariant failed on otherwise well-formed data (exit 1).
"""

from __future__ import annotations


class SpectralRecError(Exception):
    """Base class for all engine errors."""


# -- invalid input (exit code 2) -------------------------------------------


class InputError(SpectralRecError):
    pass


class MalformedInputError(InputError):
    """Structurally invalid value (zero denominator, bad config field...)."""


class ExpressionSyntaxError(InputError):
    """Expression text failed to parse; carries the byte offset."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (offset {offset})")
        self.offset = offset


class PoleEvaluationError(InputError):
    """Evaluation requested at a pole."""


class UnsupportedCurveError(InputError):
    """Curve outside the supported class (irrational ramification, ...)."""


class UnsupportedRamificationError(InputError):
    """Ramification point is not simple."""


class ModeError(InputError):
    """Requested mode cannot handle this curve."""


class DegenerateCurveError(InputError):
    """Recursion kernel denominator vanishes identically / no active points."""


class NotASpectralCurveError(InputError):
    """y^2 is not a rational function of the base coordinate."""


class BadSampleError(InputError):
    """Sample point hits an excluded locus (ramification, coincidence...)."""


class BadSheetError(InputError):
    """Initial value does not satisfy the sheet equation y0^2 = -q(x0)."""


class UnsupportedOperationError(InputError):
    """Operation explicitly outside the engine's contract."""


class IncompleteTableError(InputError):
    """A required lower-level table entry has not been computed."""


# -- internal consistency (exit code 3) -------------------------------------


class ConsistencyError(SpectralRecError):
    pass


class InternalConsistencyError(ConsistencyError):
    """Two independent computation paths disagreed."""


class UnexpectedPoleError(ConsistencyError):
    """A pole appeared outside the declared support."""


class LogarithmicTermError(ConsistencyError):
    """Antiderivative would need a logarithm (nonzero residue)."""


class InsufficientOrderError(ConsistencyError):
    """Truncated-series result changed when the order was doubled."""

    def __init__(self, message: str, order_tried: int):
        super().__init__(f"{message} (order tried: {order_tried})")
        self.order_tried = order_tried


# -- verification failures (exit code 1) ------------------------------------


class VerificationFailure(SpectralRecError):
    pass


class InvariantViolationError(VerificationFailure):
    """A declared structural invariant failed; message names it."""


class NormalizationError(VerificationFailure):
    """Fiber-sum normalization of a potential function failed."""


class WkbConsistencyError(VerificationFailure):
    """The first-order consistency condition failed at a sample."""


class QuantizationFailureError(VerificationFailure):
    """A residual coefficient of the quantized operator is nonzero."""

    def __init__(self, order: int, residual):
        super().__init__(
            f"nonzero residual at expansion order {order}: {residual}"
        )
        self.order = order
        self.residual = residual
