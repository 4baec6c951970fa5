"""Exception hierarchy.

Every failure mode that callers are expected to branch on gets its own
class; `SpecValidationError` aggregates scenario-validation violations so
a bad config reports all problems at once.
"""


class QuadrhoError(Exception):
    """Base class for all package errors."""


# --- scenario validation -------------------------------------------------

class ValidationViolation(QuadrhoError):
    """A single violated scenario invariant (collected, then raised in bulk)."""

    def __init__(self, field, message):
        self.field = field
        self.message = message
        super().__init__(f"{field}: {message}")


class NonPositiveFrequency(ValidationViolation):
    pass


class UnstableTwoPhoton(ValidationViolation):
    """|phi| >= omega0/2 makes the quadratic mode dynamically unstable."""


class NonzeroPhiReal(ValidationViolation):
    """Re(phi) must be absorbed into renormalized mass/frequency upstream."""


class BadGrid(ValidationViolation):
    pass


class SpecValidationError(QuadrhoError):
    """Raised by validate_spec; carries the full list of violations."""

    def __init__(self, violations):
        self.violations = list(violations)
        lines = "; ".join(str(v) for v in self.violations)
        super().__init__(f"invalid scenario: {lines}")


# --- evaluation errors ----------------------------------------------------

class OutOfRange(QuadrhoError):
    """Time outside a tabulated drive's grid."""


class PoleHit(QuadrhoError):
    """Laplace variable coincides with a bath pole."""


class UnsupportedBath(QuadrhoError):
    """Operation not defined for this bath variant."""


class StepSizeTooCoarse(QuadrhoError):
    """Propagation could not meet its accuracy target on the given grid."""


class OrderTooLarge(QuadrhoError):
    """Requested series order exceeds the configured ceiling."""


class TruncationNotConverged(QuadrhoError):
    """The contraction series for a matrix element did not converge."""


class SeriesNotConverged(QuadrhoError):
    """An alternating closed-form series failed its tail test."""


class ResonantDrive(QuadrhoError):
    """Drive frequency equals the mode frequency; closed form is singular."""


class DimensionCeiling(QuadrhoError):
    """Truncated Fock space exceeds the configured dimension ceiling."""


class CutoffTooSmallForTemperature(QuadrhoError):
    """Thermal tail beyond the bath cutoff exceeds tolerance."""


class NoConvergenceInStepHalving(QuadrhoError):
    """Step-halving did not converge within the iteration cap."""
