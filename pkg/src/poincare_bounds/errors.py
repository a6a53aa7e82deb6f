"""Exception hierarchy shared by all subpackages.

Each exception carries the process exit code the CLI maps it to.
"""


class BoundsError(Exception):
    exit_code = 1


class ConfigError(BoundsError, ValueError):
    exit_code = 2


class NumericalError(BoundsError, RuntimeError):
    exit_code = 3


class HypothesisViolation(BoundsError):
    """A geometric hypothesis (nesting, G1-G4) does not hold."""

    exit_code = 4

    def __init__(self, condition, message):
        self.condition = condition
        super().__init__(f"({condition}) {message}")


class SizeError(ConfigError):
    pass


class ParameterError(BoundsError, ValueError):
    exit_code = 2


class GeometryError(NumericalError):
    """Degenerate geometry, e.g. a self-intersecting boundary."""


class ConvergenceError(NumericalError):
    def __init__(self, message, history=None):
        self.history = list(history or [])
        super().__init__(message)


class CrowdingError(NumericalError):
    pass


class QuadratureError(NumericalError):
    pass


class ResolutionError(NumericalError):
    """No second-order spectrum point inside the enclosure disk."""


class UnsupportedFamily(ConfigError):
    pass
