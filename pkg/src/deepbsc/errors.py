"""Exception types raised across the package."""


class DeepBscError(Exception):
    pass


class DimensionError(DeepBscError, ValueError):
    """Array shapes do not match what an operation requires."""


class ArgumentError(DeepBscError, ValueError):
    pass


class TrainingError(DeepBscError, RuntimeError):
    """Non-finite gradients or losses during optimisation."""


class ParseError(DeepBscError, ValueError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class RangeError(DeepBscError, ValueError):
    pass


class ScalerError(DeepBscError, ValueError):
    pass


class MetricError(DeepBscError, ValueError):
    pass


class TopologyError(DeepBscError, ValueError):
    def __init__(self, message, grids=()):
        self.grids = list(grids)
        super().__init__(message)


class InvariantViolation(DeepBscError, RuntimeError):
    """An internal contract was breached; results can no longer be trusted."""


class ConfigError(DeepBscError, ValueError):
    def __init__(self, message, key=None):
        self.key = key
        super().__init__(message)
