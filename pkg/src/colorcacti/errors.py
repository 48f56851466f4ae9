"""Exception hierarchy shared by every module and mapped to CLI exit codes."""


class CactiError(Exception):
    """Base class for all package errors."""

    exit_code = 2


class DimensionError(CactiError, ValueError):
    """Array shapes or lengths do not agree."""


class IngestionError(CactiError):
    """A video, mask, or schedule file could not be read."""


class ParameterError(CactiError, ValueError):
    """A scalar parameter is outside its admissible range."""

    exit_code = 1


class ScheduleError(CactiError, ValueError):
    """A shifted mask window falls outside the stored mask pattern."""


class LayoutError(CactiError, ValueError):
    """Coefficient tree layout is incompatible with the cube dimensions."""


class ConfigError(CactiError):
    """Invalid run configuration."""

    exit_code = 1


class NumericalFailure(CactiError, ArithmeticError):
    """Inference produced non-finite values."""

    exit_code = 3

    def __init__(self, message, sweep=None):
        super().__init__(message if sweep is None else f"sweep {sweep}: {message}")
        self.sweep = sweep
