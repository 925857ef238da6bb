class DomainError(ValueError):
    """Input lies outside the domain where a formula is defined."""


class NumericError(ArithmeticError):
    """Integration produced a non-finite state."""

    def __init__(self, message, step=None):
        super().__init__(message)
        self.step = step


class LowSpeedError(DomainError):
    """Speed too small for curvature to be estimated from yaw rate."""


class InconclusiveError(RuntimeError):
    """Sampled hitch-angle rates disagree in sign inside a jackknife region."""
