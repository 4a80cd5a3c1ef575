"""Exception hierarchy shared by the solver library and the study CLI."""


class TrefftzDGError(Exception):
    """Base class for all errors raised by trefftz_dg."""


class ConfigError(TrefftzDGError, ValueError):
    """Invalid study configuration. `key` names the offending setting."""

    def __init__(self, key: str, message: str):
        self.key = key
        super().__init__(f"{key}: {message}")


class SolverError(TrefftzDGError, RuntimeError):
    """A linear solve failed; `residual` is the relative residual that was reached."""

    def __init__(self, message: str, residual: float = float("inf"), method: str | None = None):
        self.residual = residual
        self.method = method
        super().__init__(f"{message} (method={method}, relative residual={residual:.3e})")


class DecompositionError(TrefftzDGError, RuntimeError):
    """An element decomposition failed: LAPACK did not converge, or the detected kernel has the wrong size."""


class NotApplicableError(TrefftzDGError, ValueError):
    """The requested quantity is not defined for this operator configuration."""
