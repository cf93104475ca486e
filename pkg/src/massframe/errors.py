"""Exception types shared across the package."""


class DomainError(ValueError):
    """Input outside the mathematical domain (nonpositive mass, non-symplectic map)."""


class ParamRangeError(ValueError):
    """Evaluation time outside the sampled range of a tabulated family."""


class UsageError(ValueError):
    """Unknown variant or malformed call."""


class NumericalFailure(RuntimeError):
    """Non-finite values appeared during integration."""

    def __init__(self, message, time=None):
        super().__init__(message)
        self.time = time


class TruncationError(RuntimeError):
    """Fock-space population leaked into the truncation tail."""

    def __init__(self, message, time=None):
        super().__init__(message)
        self.time = time


class ConfigError(ValueError):
    """Scenario configuration could not be parsed or validated."""

    def __init__(self, message, line=None, key=None):
        super().__init__(message)
        self.line = line
        self.key = key


class InvariantViolation(RuntimeError):
    """A conserved quantity or physicality condition was broken."""
