"""Exception types shared by every engine.

Each class maps to one failure kind so the CLI can translate it into an exit
code and a machine-readable error record.
"""


class SurfCorrError(Exception):
    kind = "error"


class InvalidParameter(SurfCorrError, ValueError):
    kind = "invalid-parameter"


class GaugeNotApplicable(SurfCorrError):
    kind = "gauge-not-applicable"


class TooLargeForExact(SurfCorrError):
    kind = "too-large-for-exact"


class UndefinedFidelity(SurfCorrError, ZeroDivisionError):
    kind = "undefined-fidelity"


class ComplexWeightsUnsupported(SurfCorrError):
    kind = "complex-weights-unsupported"


class NoCrossing(SurfCorrError):
    kind = "no-crossing"


class NoPredictor(SurfCorrError):
    kind = "no-predictor"


class ConfigError(SurfCorrError):
    """Raised with every violation found, not just the first."""

    kind = "config-error"

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))
