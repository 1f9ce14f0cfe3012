"""Exception hierarchy for the vcburgers package."""


class VcBurgersError(Exception):
    """Base class for all package errors."""


class TauOutOfRange(VcBurgersError):
    """Relaxation time tau <= 1/2: the requested (b, eta) pair is
    anti-diffusive and the scheme cannot represent it."""


class NonFiniteState(VcBurgersError):
    """A population or velocity field picked up NaN/Inf (divergence)."""

    def __init__(self, message, step_index=None):
        super().__init__(message)
        self.step_index = step_index


class SingularDenominator(VcBurgersError):
    """The denominator of the coefficient family / reference solution is
    within tolerance of zero."""


class NoConvergence(VcBurgersError):
    """Adaptive quadrature hit its subdivision limit."""


class LengthMismatch(VcBurgersError):
    """Two fields that must share a grid have different lengths."""


class ZeroReferenceNorm(VcBurgersError):
    """The L1 norm of the reference field is zero; GRE undefined."""


class DegenerateFit(VcBurgersError):
    """Convergence-order fit is impossible (too few or invalid samples)."""


class CflViolation(VcBurgersError):
    """The finite-difference oracle's stability constraint is violated."""


class UnknownExample(VcBurgersError):
    """Requested example index outside 1..4."""


class ConfigError(VcBurgersError):
    """Invalid experiment configuration."""
