"""Exception types shared across the package."""


class SlowcertError(Exception):
    """Base class for all package-specific errors."""


class ConfigError(SlowcertError):
    """A declared constant, function, or configuration violates its contract."""


class NumericalError(SlowcertError):
    """A numerical evaluation produced a non-finite or invalid value."""


class QuadratureError(NumericalError):
    """Adaptive quadrature failed to meet its tolerance within the depth budget."""

    def __init__(self, message, error_estimate=None, interval=None):
        super().__init__(message)
        self.error_estimate = error_estimate
        self.interval = interval


class DomainError(SlowcertError):
    """An argument lies outside the mathematical domain of the operation."""


class IntegrationError(NumericalError):
    """ODE integration aborted; carries the partial trajectory up to the failure.

    ``reason`` is one of ``"step_collapse"``, ``"blow_up"``, ``"non_finite"``.
    """

    def __init__(self, message, reason, times, states, stats=None):
        super().__init__(message)
        self.reason = reason
        self.times = times
        self.states = states
        self.stats = stats


class NonMonotoneError(SlowcertError):
    """A bisection bracket turned out inverted (pass at the low end, fail at the high end)."""


class ExpressionError(ConfigError):
    """Expression parsing failed; carries the character position."""

    def __init__(self, message, position):
        super().__init__(f"{message} (at position {position})")
        self.position = position
