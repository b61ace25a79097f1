"""Exception types shared across the package."""


class ValidationError(ValueError):
    """Invalid domain data: violated invariants, inconsistent dimensions."""


class GridResolutionError(ValidationError):
    """Requested resolution is too coarse for some patch."""


class NumericalError(RuntimeError):
    """A solver failed to reach its tolerance."""


class SteadyConvergenceError(NumericalError):
    """Newton and the time-march fallback both failed; carries the last residual."""

    def __init__(self, message: str, residual: float):
        super().__init__(message)
        self.residual = residual


class EigenSolveError(NumericalError):
    """Principal eigenpair could not be isolated at this resolution."""


class SimulationBlowUpError(NumericalError):
    """State escaped its a-priori bounds; indicates a scheme bug."""
