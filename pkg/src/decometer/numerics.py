"""Shared numerical kernels.

Three pieces used everywhere else in the package:

* closed-form oscillatory polynomial integrals  I_a(w, t) = int_0^t u^a e^{-iwu} du,
* adaptive Gauss-Legendre quadrature on [0, inf) for integrands with a
  Gaussian-decay envelope,
* bracketed root finding on strictly increasing functions.

All computation is in natural units (hbar = k_B = 1).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.optimize import brentq

from .errors import ConvergenceError, UnboundedRootError

__all__ = [
    "QuadratureSpec",
    "DEFAULT_QUAD",
    "osc_poly_integral",
    "osc_poly_table",
    "gaussian_tail_quad",
    "find_root_increasing",
]

# Taylor / recursion switch for the oscillatory integrals: both branches carry
# >= 10 accurate digits at this |w t| in double precision.
TAYLOR_SWITCH = 0.5
_TAYLOR_TERMS = 40

# 12-node Gauss-Legendre rule; one panel integrates ~3 oscillation periods to
# near machine precision, the adaptive doubling handles the rest.
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(12)


@dataclass(frozen=True)
class QuadratureSpec:
    """Tolerances and subdivision budget for the adaptive quadratures."""

    rel_tol: float = 1e-9
    abs_tol: float = 1e-14
    max_subdivisions: int = 12

    def __post_init__(self):
        if not self.rel_tol > 0:
            raise ValueError("rel_tol must be > 0")
        if self.abs_tol < 0:
            raise ValueError("abs_tol must be >= 0")
        if self.max_subdivisions < 1:
            raise ValueError("max_subdivisions must be >= 1")


DEFAULT_QUAD = QuadratureSpec()


def _osc_taylor(alpha: int, w: float, t: float) -> complex:
    """Series in w for I_alpha; exact at w=0, used for |w t| < TAYLOR_SWITCH."""
    z = -1j * w * t
    acc = 0.0 + 0.0j
    p = 1.0 + 0.0j  # z^n / n!
    for n in range(_TAYLOR_TERMS):
        term = p / (alpha + n + 1)
        acc += term
        if n >= 2 and abs(term) < 1e-18 * abs(acc):
            break
        p *= z / (n + 1)
    return acc * t ** (alpha + 1)


def _osc_recursion(alpha: int, w: float, t: float) -> complex:
    """Upward closed-form recursion from I_0, stable for |w t| >= O(1)."""
    e = np.exp(-1j * w * t)
    cur = (1.0 - e) / (1j * w)
    for a in range(1, alpha + 1):
        cur = (1j / w) * (t**a * e - a * cur)
    return cur


def osc_poly_integral(alpha: int, w: float, t: float) -> complex:
    """int_0^t u^alpha e^{-i w u} du in closed form.

    Evaluated by the downward-recursion closed form seeded at
    I_0 = (1 - e^{-iwt})/(iw); for |w t| below the switch threshold a
    truncated Taylor series in w is used instead to avoid cancellation.
    """
    if alpha < 0:
        raise ValueError("alpha must be a nonnegative integer")
    if t < 0:
        raise ValueError("t must be nonnegative")
    if t == 0.0:
        return 0.0 + 0.0j
    if abs(w * t) < TAYLOR_SWITCH:
        return _osc_taylor(alpha, w, t)
    return _osc_recursion(alpha, w, t)


def osc_poly_table(alpha_max: int, w: np.ndarray, t: float) -> np.ndarray:
    """I_a(w, t) for all a = 0..alpha_max, vectorized over a frequency array.

    Returns an array of shape (alpha_max + 1, len(w)).  Same branch logic as
    osc_poly_integral, applied elementwise.
    """
    if alpha_max < 0:
        raise ValueError("alpha_max must be a nonnegative integer")
    if t < 0:
        raise ValueError("t must be nonnegative")
    w = np.atleast_1d(np.asarray(w, dtype=float))
    out = np.empty((alpha_max + 1, w.size), dtype=complex)
    if t == 0.0:
        out[:] = 0.0
        return out

    small = np.abs(w * t) < TAYLOR_SWITCH
    big = ~small

    if np.any(big):
        wb = w[big]
        e = np.exp(-1j * wb * t)
        cur = (1.0 - e) / (1j * wb)
        out[0, big] = cur
        for a in range(1, alpha_max + 1):
            cur = (1j / wb) * (t**a * e - a * cur)
            out[a, big] = cur

    if np.any(small):
        z = -1j * w[small] * t
        for a in range(alpha_max + 1):
            acc = np.zeros_like(z)
            p = np.ones_like(z)
            for n in range(_TAYLOR_TERMS):
                acc += p / (a + n + 1)
                p *= z / (n + 1)
            out[a, small] = acc * t ** (a + 1)

    return out


def _panel_eval(f: Callable, upper: float, n_panels: int) -> float:
    """Composite 12-node Gauss-Legendre integral of f over [0, upper]."""
    edges = np.linspace(0.0, upper, n_panels + 1)
    half = 0.5 * (edges[1:] - edges[:-1])
    mid = 0.5 * (edges[1:] + edges[:-1])
    # node matrix (n_panels, 12) flattened so f sees a single vector
    xs = (mid[:, None] + half[:, None] * _GL_NODES[None, :]).ravel()
    ys = np.asarray(f(xs), dtype=float).reshape(n_panels, _GL_NODES.size)
    return float(np.sum(ys @ _GL_WEIGHTS * half))

def gaussian_tail_quad(
    f: Callable,
    decay_scale: float,
    spec: QuadratureSpec = DEFAULT_QUAD,
) -> float:
    """Adaptive quadrature of int_0^inf f(w) dw for Gaussian-tailed integrands.

    The integral is truncated where the Gaussian envelope e^{-(w/decay_scale)^2}
    falls below abs_tol; the finite part is integrated by composite
    Gauss-Legendre panels, doubling the panel count until two successive
    estimates agree within rel_tol (plus the abs_tol floor).

    f must accept a numpy array of abscissae and return an array of values.
    """
    if decay_scale <= 0:
        raise ValueError("decay_scale must be > 0")
    floor = max(spec.abs_tol, 1e-300)
    upper = decay_scale * np.sqrt(np.log(1.0 / floor))

    n_panels = 64
    prev = _panel_eval(f, upper, n_panels)
    for _ in range(spec.max_subdivisions):
        n_panels *= 2
        cur = _panel_eval(f, upper, n_panels)
        if abs(cur - prev) <= spec.rel_tol * abs(cur) + spec.abs_tol:
            return cur
        prev = cur
    raise ConvergenceError(
        f"quadrature did not converge within {spec.max_subdivisions} "
        f"subdivisions (last two estimates {prev:.17g}, {cur:.17g})",
        estimates=(prev, cur),
    )


def find_root_increasing(
    g: Callable[[float], float],
    target: float,
    bracket_hint: float,
    tol: float = 1e-10,
) -> float:
    """Solve g(t*) = target for strictly increasing g with g(0) < target.

    A bracket is found by geometric expansion (or contraction) from
    bracket_hint, then refined by Brent bisection/interpolation.  tol is a
    relative tolerance on the abscissa.
    """
    if bracket_hint <= 0:
        raise ValueError("bracket_hint must be > 0")
    hi = float(bracket_hint)
    ghi = g(hi)
    if ghi >= target:
        # contract downward until g(lo) < target
        lo = hi
        for _ in range(200):
            lo *= 0.5
            glo = g(lo)
            if glo < target:
                break
            hi = lo
        else:
            raise UnboundedRootError(
                f"no lower bracket found below {bracket_hint:g} "
                f"(g stays >= {target:g})"
            )
    else:
        lo = hi
        for _ in range(200):
            lo, hi = hi, hi * 2.0
            ghi = g(hi)
            if ghi >= target:
                break
        else:
            raise UnboundedRootError(
                f"target {target:g} not reached during geometric expansion "
                f"from {bracket_hint:g} (last g = {ghi:g})"
            )
    return float(
        brentq(
            lambda u: g(u) - target,
            lo,
            hi,
            xtol=max(tol * hi, 5e-324),
            rtol=max(tol, 8.9e-16),
            maxiter=200,
        )
    )
