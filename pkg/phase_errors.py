"""
Exception and warning types shared by the phase-space modules.

Every error raised on purpose by the numerics derives from PhaseSpaceError so the
verification harness can tell a failed identity apart from a crash.
"""


class PhaseSpaceError(Exception):
    """Base class for all phase-space numerics errors."""


class InvalidArgumentError(PhaseSpaceError, ValueError):
    """An argument is outside the range an operation accepts."""


class DegenerateInputError(PhaseSpaceError):
    """Input has no weight on the block an operation measures (zero norm)."""


class CalibrationError(PhaseSpaceError):
    """The trace-orthogonality constant is not stable across phase points."""


class OracleFitError(PhaseSpaceError):
    """A least-squares symbol fit left a residual above tolerance."""


class AccuracyError(PhaseSpaceError):
    """A regulated quadrature could not be extrapolated reliably."""


class ConfigError(PhaseSpaceError):
    """Suite configuration could not be parsed or failed validation."""


class AccuracyWarning(UserWarning):
    """A quadrature integrand has not decayed at the edge of its grid."""
