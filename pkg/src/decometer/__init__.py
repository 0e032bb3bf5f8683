"""decometer: decoherence and entanglement time scales of a quantum measurement.

Model: a measured object S couples to a single pointer degree of freedom P
(H_PS = eps * S * P) while the pointer couples to a bosonic bath through a
power of its position (H_PB = B * X^alpha).  The package evaluates the
resulting object-pointer density-matrix elements, the decoherence exponent
and phase, decoherence/entanglement times in every regime (exact root,
interaction-dominated, Markov at finite and zero temperature), equilibrium
apparatus corrections, pointer reduced states and Wigner functions, plus a
brute-force finite-bath oracle for the Gaussian (Wick) statistics the model
rests on.  Natural units hbar = k_B = 1 throughout.
"""

__version__ = "0.1.0"

from .errors import (  # noqa: F401
    ConfigError,
    ConvergenceError,
    DecoherenceFreeError,
    DecometerError,
    DegenerateSpectrumError,
    IterationError,
    RegimeWarning,
    ResolutionError,
    ResourceError,
    SolverError,
    StabilityError,
    UnboundedRootError,
)
