"""Error taxonomy with fixed process exit codes.

The CLI maps every library error onto a small, documented set of exit codes:

    0  success
    2  configuration / input error
    3  apparatus instability or decoherence-free request
    4  solver failure (quadrature, root finding, fixed-point iteration)
    5  grid resolution insufficient
    6  resource cap exceeded (combinatorics, truncated-space dimension)
"""


class DecometerError(Exception):
    """Base class for all library errors."""

    exit_code = 1


class ConfigError(DecometerError):
    """Invalid configuration value or inconsistent input."""

    exit_code = 2


class StabilityError(DecometerError):
    """Effective pointer potential is unstable for the requested variant."""

    exit_code = 3


class DecoherenceFreeError(DecometerError):
    """The requested eigenvalue pair cannot decohere (s'^alpha = s^alpha)."""

    exit_code = 3


class DegenerateSpectrumError(DecoherenceFreeError):
    """No coupled eigenvalue pair is available (diagonal or trivial rho_S)."""


class SolverError(DecometerError):
    """Generic numerical-solver failure."""

    exit_code = 4


class ConvergenceError(SolverError):
    """Adaptive quadrature failed to converge; carries the last two estimates."""

    def __init__(self, message, estimates=None):
        super().__init__(message)
        self.estimates = tuple(estimates) if estimates is not None else ()


class UnboundedRootError(SolverError):
    """Root bracketing exhausted its expansion budget without crossing."""


class IterationError(SolverError):
    """Fixed-point iteration failed to converge."""


class ResolutionError(DecometerError):
    """Requested grid cannot resolve the structures it must represent."""

    exit_code = 5


class ResourceError(DecometerError):
    """Hard cap on combinatorial or truncated-space size exceeded."""

    exit_code = 6


class RegimeWarning(UserWarning):
    """Advisory: an asymptotic formula is used outside its validity window."""


class SqueezeWarning(UserWarning):
    """Advisory: pointer state is strongly squeezed relative to its potential."""
