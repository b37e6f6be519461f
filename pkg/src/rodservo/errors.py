"""Exception types raised across the package."""


class ShapeServoError(Exception):
    """Base class for all rodservo errors."""


class WorkspaceError(ShapeServoError):
    """A pose lies outside the configured workspace."""


class StencilError(ShapeServoError):
    """A finite-difference stencil would leave the workspace."""


class InvalidCommandError(ShapeServoError):
    """A velocity command contains non-finite components."""


class DegenerateCurveError(ShapeServoError):
    """The rendered centerline has coincident consecutive points."""


class RankDeficiencyError(ShapeServoError):
    """Requested more feature directions than the data supports."""


class ModelFormatError(ShapeServoError):
    """A model or dataset file is malformed or internally inconsistent."""


class FilterNumericalError(ShapeServoError):
    """The filter update could not be completed numerically.

    Carries the step diagnostics gathered before the failure in the
    ``diagnostics`` attribute.
    """

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics


class SingularGainError(ShapeServoError):
    """The controller gain matrix is singular."""


class ConfigError(ShapeServoError):
    """A run configuration file is invalid."""
