"""Exception hierarchy shared by the library and the command line front-end."""


class SpinwaveError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(SpinwaveError, ValueError):
    """Invalid scenario description or parameter set."""


class NumericalError(SpinwaveError, RuntimeError):
    """A numerical procedure failed or could not reach its tolerance."""


class NormDriftError(NumericalError):
    """Propagated wavefunctions lost norm beyond the allowed drift."""


class TailBoundError(NumericalError):
    """A thermal sum was truncated before its tail became negligible."""

    def __init__(self, message, required_n_max=None):
        super().__init__(message)
        self.required_n_max = required_n_max


class GridTooSmallError(NumericalError):
    """The spatial grid cannot represent the requested state."""

    def __init__(self, message, required_half_width=None):
        super().__init__(message)
        self.required_half_width = required_half_width


class QuadratureError(NumericalError):
    """Adaptive quadrature did not converge to the requested tolerance."""

    def __init__(self, message, achieved=None):
        super().__init__(message)
        self.achieved = achieved


class FitError(SpinwaveError):
    """A decay fit could not be performed or did not converge."""


class VisibilityError(SpinwaveError, ZeroDivisionError):
    """Fringe visibility requested for a vanishing coherence C(0)."""
