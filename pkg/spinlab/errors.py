class SpinLabError(Exception):
    """Base class for every error raised by spinlab."""


class SpecValidationError(SpinLabError, ValueError):
    """Invalid chain, network or design parameters.

    Subclasses ValueError so that pydantic validators surface it as a ValidationError.
    """


class DimensionError(SpinLabError, ValueError):
    """Operands with mismatched dimensions, or a full space larger than allowed."""


class NotHermitianError(SpinLabError, ValueError):
    pass


class PremiseViolationError(SpecValidationError):
    """The chain does not satisfy the premise of a protocol (e.g. omega != lambda)."""


class NumericalFailure(SpinLabError):
    """A computation finished but its result failed a numerical check."""


class LeakageTooLargeError(NumericalFailure):
    def __init__(self, leakage: float, threshold: float) -> None:
        self.leakage = leakage
        self.threshold = threshold
        super().__init__(f"mediator sector is not invariant: leakage {leakage:.3e} >= {threshold:.1e}")
