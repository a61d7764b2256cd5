"""Exception and warning types shared across the package."""


class SlowLightError(Exception):
    """Base class for all errors raised by :mod:`slowlight`."""


class InvalidParameterError(SlowLightError, ValueError):
    pass


class SingularModelError(SlowLightError, ArithmeticError):
    pass


class SingularScattererError(SingularModelError):
    """A qubit with ``1 + r == 0`` has no transfer matrix."""

    def __init__(self, message, qubit_index=None, omega=None):
        super().__init__(message)
        self.qubit_index = qubit_index
        self.omega = omega


class FitError(SlowLightError, RuntimeError):
    """A least-squares fit did not converge.

    ``best`` holds the best parameter vector seen, ``diagnostics`` any
    residual information gathered before giving up.
    """

    def __init__(self, message, best=None, diagnostics=None):
        super().__init__(message)
        self.best = best
        self.diagnostics = diagnostics or {}


class ShapeError(SlowLightError, ValueError):
    pass


class DivisionGuardError(SlowLightError, ZeroDivisionError):
    pass


class ResolutionError(SlowLightError, ValueError):
    """Phase changes by more than pi between neighbouring grid points."""


class StructureNotFoundError(SlowLightError, ValueError):
    pass


class InsufficientStencilError(SlowLightError, ValueError):
    pass


class BranchTrackingError(SlowLightError, ValueError):
    pass


class CoverageError(SlowLightError, ValueError):
    pass


class SamplingError(SlowLightError, ValueError):
    pass


class TruncationError(SlowLightError, ValueError):
    pass


class ConfigError(SlowLightError, ValueError):
    pass


class ValidityWarning(UserWarning):
    """A formula is evaluated outside its approximate range of validity."""


class ConsistencyWarning(UserWarning):
    """Parameters violate a physical consistency relation."""
