"""Exception hierarchy shared across the package."""


class ApmError(Exception):
    """Base class for every error raised by apmbench."""


class InvalidDimensionError(ApmError, ValueError):
    pass


class InvalidConfigError(ApmError, ValueError):
    pass


class DimensionMismatchError(ApmError, ValueError):
    pass


class ScoreRangeError(ApmError, ValueError):
    pass


class EmptyInputError(ApmError, ValueError):
    pass


class NonSymmetricError(ApmError, ValueError):
    pass


class NonConvergenceError(ApmError, RuntimeError):
    """Iterative routine hit its iteration cap. ``last`` holds the final iterate."""

    def __init__(self, message, last=None):
        super().__init__(message)
        self.last = last


class TrainingError(ApmError, RuntimeError):
    def __init__(self, message, loss_trace=None):
        super().__init__(message)
        self.loss_trace = list(loss_trace or [])


class NoPreferenceError(ApmError, ValueError):
    pass


class GatewayError(ApmError):
    pass


class TransportError(GatewayError):
    pass


class ContentError(GatewayError):
    pass


class JudgeParseError(GatewayError):
    def __init__(self, message, raw_text=""):
        super().__init__(message)
        self.raw_text = raw_text


class StageError(ApmError, RuntimeError):
    pass
