"""Exception types shared across the package."""


class DegenerateTrajectoryError(ValueError):
    """Trajectory has zero total duration."""


class InfeasiblePathError(ValueError):
    """Waypoints violate the joint position limits before optimization."""


class PlanningFailedError(RuntimeError):
    """Both the primary solve and the tightened retry failed the post-check."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class UnsupportedPathLengthError(ValueError):
    """Path has more waypoints than the model was configured for."""


class DatasetError(RuntimeError):
    """Dataset generation aborted or a dataset file failed validation."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class ModelFileError(RuntimeError):
    """Model file is corrupt, truncated, or has an incompatible version."""


class NumericalBreakdownError(RuntimeError):
    """A callback or layer produced a non-finite value."""

    def __init__(self, message, context=None):
        super().__init__(message)
        self.context = context or {}
