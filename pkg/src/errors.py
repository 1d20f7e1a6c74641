"""
Exception hierarchy for Resonant.

Every failure raised by the library derives from ReservoirError so the
command-line front end can map it onto an exit code with a single except
clause.
"""

from typing import Optional


class ReservoirError(Exception):
    """Base class for all library errors."""


class ConfigError(ReservoirError):
    """Raised for invalid or unreadable experiment configuration."""


class DimensionError(ReservoirError, ValueError):
    """Raised when array shapes do not match the declared dimensions."""


class NonFiniteInputError(ReservoirError, ValueError):
    """Raised when an input sample is NaN or infinite."""

    def __init__(self, step: int, message: Optional[str] = None):
        self.step = step
        super().__init__(message or f"non-finite input sample at step {step}")

    def __reduce__(self):
        return (type(self), (self.step, str(self)))


class NumericalError(ReservoirError):
    """Raised when a numerical invariant (Hermiticity, trace, positivity) breaks."""


class SingularSystemError(NumericalError):
    """Raised when the readout normal equations cannot be solved."""


class GenerationError(ReservoirError):
    """Raised when a random reservoir cannot be drawn."""


class BundleError(ReservoirError):
    """Raised for unreadable or mismatching model bundles."""

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        self.detail = message
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)

    def __reduce__(self):
        return (type(self), (self.detail, self.line))


class StageError(ReservoirError):
    """Raised by the experiment driver to label the stage a failure came from."""

    def __init__(self, stage: str, cause: Exception):
        self.stage = stage
        self.cause = cause
        super().__init__(f"[{stage}] {type(cause).__name__}: {cause}")

    def __reduce__(self):
        # worker processes send exceptions back pickled
        return (type(self), (self.stage, self.cause))
