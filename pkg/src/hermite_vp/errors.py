"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class ConfigurationError(ValueError):
    """A configuration value is invalid or inconsistent."""


class SolverError(RuntimeError):
    """An iterative solve failed to reach its tolerance.

    Parameters
    ----------
    message : str
        Human readable description.
    residual_norm : float
        Residual norm at the point of failure.
    context : dict, optional
        Extra information such as the simulation time and step size.
    """

    def __init__(self, message, residual_norm=float("nan"), context=None):
        super().__init__(message)
        self.residual_norm = float(residual_norm)
        self.context = dict(context or {})
        self.trajectory = None

    def __str__(self):
        base = super().__str__()
        extra = f" (residual norm {self.residual_norm:.3e}"
        if self.context:
            extra += ", " + ", ".join(f"{k}={v}" for k, v in self.context.items())
        return base + extra + ")"
