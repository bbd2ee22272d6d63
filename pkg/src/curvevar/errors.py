"""Exception types shared across the package."""


class CurveVarError(Exception):
    """Base class for all package errors."""


class ConfigError(CurveVarError):
    """Malformed or inconsistent user configuration."""


class NotTangentError(CurveVarError):
    """Vector fails the tangency precondition on an embedded model."""


class DegenerateMetricError(CurveVarError):
    """Induced metric is (numerically) singular; the map is not an immersion."""

    def __init__(self, message, node=None):
        super().__init__(message)
        self.node = node


class GuardViolation(CurveVarError):
    """Energy density evaluated outside its domain guard (e.g. H <= 0)."""

    def __init__(self, message, node=None):
        super().__init__(message)
        self.node = node


class NotCriticalError(CurveVarError):
    """Second-variation formula requested away from a critical immersion."""
