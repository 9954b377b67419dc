from typing import Any, Optional


class LabError(Exception):
    """Base class of every error raised by the lab; ``exit_code`` is the CLI status."""

    exit_code: int = 1

    def __init__(self, message: str):
        super().__init__(message)
        self.message = message


class ConfigError(LabError):
    exit_code = 2

    def __init__(self, key: str, message: str):
        super().__init__(f"{key}: {message}")
        self.key = key
        self.detail = message

    def __reduce__(self):
        return type(self), (self.key, self.detail)


class MissingKey(ConfigError):
    pass


class UnknownKey(ConfigError):
    pass


class TypeMismatch(ConfigError):
    pass


class ConstraintViolation(ConfigError):
    pass


class HypothesisViolation(LabError):
    exit_code = 2


class GridError(LabError):
    exit_code = 2


class InitialDataError(LabError):
    exit_code = 2


class OutputError(LabError):
    exit_code = 2

    def __init__(self, path: Any, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path
        self.detail = message

    def __reduce__(self):
        return type(self), (self.path, self.detail)


class NumericalError(LabError):
    exit_code = 3


class StepDiverged(NumericalError):
    """A forward Euler step produced NaN or Inf; ``last_good`` is the field before it."""

    def __init__(self, message: str, last_good: Optional[Any] = None):
        super().__init__(message)
        self.last_good = last_good


class SolverConvergenceError(NumericalError):
    pass


class DiagnosticError(LabError):
    exit_code = 1


class CalibrationError(DiagnosticError):
    pass
