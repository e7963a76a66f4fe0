"""Exception types raised by the toolkit."""


class QuadratureError(RuntimeError):
    """An integral did not reach its requested tolerance."""

    def __init__(self, message, achieved=None):
        super().__init__(message if achieved is None else f"{message} (achieved error {achieved:.3g})")
        self.achieved = achieved


class DivergenceError(ValueError):
    """An integral that must be finite diverges for the given inputs."""


class TruncationError(RuntimeError):
    """A series truncation could not be certified to the requested bound."""
