"""Exception hierarchy shared by every module."""


class RestartGradeError(Exception):
    """Base class; ``module`` names the subsystem that raised."""

    module = "restart_grade"

    def __init__(self, message="", module=None):
        super().__init__(message)
        if module is not None:
            self.module = module

    def to_dict(self):
        return {"error": type(self).__name__, "module": self.module, "message": str(self)}


class DomainTooSmallError(RestartGradeError, ValueError):
    module = "lattice"


class OutOfTableError(RestartGradeError, KeyError):
    module = "harmonic"

    def __str__(self):
        return str(self.args[0]) if self.args else "point outside table"


class NumericFailureError(RestartGradeError, RuntimeError):
    """An iterative scheme failed to reach its tolerance."""

    module = "numeric"

    def __init__(self, message, residual=float("nan"), module=None):
        super().__init__(message, module)
        self.residual = residual

    def to_dict(self):
        out = super().to_dict()
        out["residual"] = self.residual
        return out


class BracketError(RestartGradeError, RuntimeError):
    module = "grade"


class EnvelopeError(RestartGradeError, RuntimeError):
    module = "bounds"


class EstimateUnusableError(RestartGradeError, RuntimeError):
    module = "montecarlo"


class ConfigError(RestartGradeError, ValueError):
    module = "cli"
