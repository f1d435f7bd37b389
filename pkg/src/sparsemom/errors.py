"""Exception taxonomy shared across the library."""


class ParameterError(ValueError):
    """A scalar argument is outside its documented domain."""


class ShapeError(ValueError):
    """Array dimensions or index sets are inconsistent."""


class StateError(RuntimeError):
    """An operation was called on an object in the wrong state."""


class NumericError(ArithmeticError):
    """An iteration produced non-finite values."""

    def __init__(self, message: str, coordinate: int | None = None, iteration: int | None = None):
        super().__init__(message)
        self.coordinate = coordinate
        self.iteration = iteration


class ConfigError(ValueError):
    """A config file failed to parse or validate.

    line is 1-based; 0 means the error is not tied to a single line.
    """

    def __init__(self, message: str, line: int = 0, key: str = ""):
        loc = f"line {line}" if line else "config"
        prefix = f"{loc}: {key}: " if key else f"{loc}: "
        super().__init__(prefix + message)
        self.line = line
        self.key = key
