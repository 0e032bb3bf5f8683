"""Object-pointer density-matrix elements and pointer observables.

Four levels of description of the measurement dynamics live here:

* premeasurement only -- the bath is switched off and the interaction drags
  the pointer wave packet by eps*t*s per eigenvalue;
* the sequential (static-bath) caricature, where a frozen bath dephases an
  already displaced pointer;
* the full product-form elements for both apparatus preparations: a bare
  Gaussian pointer (partial equilibrium) and a pointer pre-thermalized with
  the bath (equilibrium apparatus, R_t machinery);
* reduced pointer densities on position grids and their Wigner maps.

Everything below uses hbar = k_B = 1 and the local quadratic approximation
V(x) = v2 x^2 / 2 of the confining potential.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from types import MappingProxyType
from typing import Mapping, Optional, Tuple

import numpy as np

from . import bath as bath_mod
from .bath import SpectralBath
from .decoherence import (
    MeasurementSetup,
    ObjectSpec,
    PointerSpec,
    Variant,
    _adaptive_panels,
    _coeff_arrays,
    _d_phi,
    _j_area,
    _p_bounds,
    _upper_cutoff,
    d_exponent,
)
from .errors import ConfigError, ConvergenceError, ResolutionError, StabilityError
from .numerics import (
    DEFAULT_QUAD,
    QuadratureSpec,
    _GL_NODES,
    _GL_WEIGHTS,
    osc_poly_table,
)

__all__ = [
    "GridState",
    "WignerGrid",
    "pointer_density",
    "premeasurement_element",
    "sequential_t_dec",
    "sequential_exponent",
    "rho_ps_element_partial",
    "effective_potential",
    "w_eff",
    "barrier_height",
    "r0_density",
    "g_t",
    "r_t",
    "r_t_numeric",
    "rho_ps_element_equilibrium",
    "default_x_grid",
    "grid_state",
    "pointer_reduced",
    "wigner",
]


# --------------------------------------------------------------------------
# grid containers
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class GridState:
    """Object-pointer state sampled on a position grid at a single time.

    elements maps an eigenvalue index pair (i, j) to the complex matrix of
    <s_i, x | rho_PS(t) | s_j, x'> over x_grid x x_grid.  Hermiticity
    elements[(i, j)] = elements[(j, i)]^dagger is enforced on construction;
    the trace is exposed as a method because a finite grid may legitimately
    truncate a slowly decaying tail.
    """

    x_grid: np.ndarray
    elements: Mapping[Tuple[int, int], np.ndarray]
    t: float

    def __post_init__(self):
        grid = np.array(self.x_grid, dtype=float)
        if grid.ndim != 1 or grid.size < 2 or np.any(np.diff(grid) <= 0):
            raise ConfigError("x_grid must be strictly increasing with >= 2 points")
        grid.setflags(write=False)
        object.__setattr__(self, "x_grid", grid)
        frozen = {}
        for key, mat in dict(self.elements).items():
            arr = np.array(mat, dtype=complex)
            if arr.shape != (grid.size, grid.size):
                raise ConfigError("element matrices must be square on the grid")
            arr.setflags(write=False)
            frozen[key] = arr
        for (i, j), arr in frozen.items():
            partner = frozen.get((j, i))
            if partner is None:
                raise ConfigError(f"element ({i},{j}) lacks its hermitian partner")
            scale = max(1.0, float(np.max(np.abs(arr))))
            if not np.allclose(arr, partner.conj().T, rtol=0.0, atol=1e-10 * scale):
                raise ConfigError(f"element pair ({i},{j}) violates hermiticity")
        object.__setattr__(self, "elements", MappingProxyType(frozen))

    def trace(self) -> float:
        """Grid-trapezoid integral of the summed diagonal blocks."""
        tot = 0.0
        for (i, j), mat in self.elements.items():
            if i == j:
                tot += float(np.trapezoid(np.diagonal(mat).real, self.x_grid))
        return tot

    def position_density(self) -> np.ndarray:
        """Diagonal density rho(x, x) summed over eigenvalue blocks."""
        dens = np.zeros(self.x_grid.size)
        for (i, j), mat in self.elements.items():
            if i == j:
                dens += np.diagonal(mat).real
        return dens


@dataclass(frozen=True)
class WignerGrid:
    """Pointer Wigner function W(x, p) sampled on a rectangular grid."""

    x_grid: np.ndarray
    p_grid: np.ndarray
    w: np.ndarray

    def __post_init__(self):
        xg = np.array(self.x_grid, dtype=float)
        pg = np.array(self.p_grid, dtype=float)
        ww = np.array(self.w, dtype=float)
        if xg.ndim != 1 or pg.ndim != 1:
            raise ConfigError("x_grid and p_grid must be one-dimensional")
        if ww.shape != (xg.size, pg.size):
            raise ConfigError("w must have shape (len(x_grid), len(p_grid))")
        for arr in (xg, pg, ww):
            arr.setflags(write=False)
        object.__setattr__(self, "x_grid", xg)
        object.__setattr__(self, "p_grid", pg)
        object.__setattr__(self, "w", ww)

    def normalization(self) -> float:
        return float(
            np.trapezoid(np.trapezoid(self.w, self.p_grid, axis=1), self.x_grid)
        )

    def position_marginal(self) -> np.ndarray:
        """int W dp; reproduces the position density of the reduced state."""
        return np.trapezoid(self.w, self.p_grid, axis=1)


# --------------------------------------------------------------------------
# elementary densities and the bath-free / static-bath pictures
# --------------------------------------------------------------------------


def pointer_density(pointer: PointerSpec, x, x_prime):
    """Gaussian pointer matrix element <x|rho_P|x'>; real and positive."""
    x = np.asarray(x, dtype=float)
    xp = np.asarray(x_prime, dtype=float)
    norm = 1.0 / math.sqrt(2.0 * math.pi * pointer.delta**2)
    expo = -((x + xp) ** 2) / (8.0 * pointer.delta**2)
    expo = expo - 2.0 * math.pi**2 * (x - xp) ** 2 / pointer.lam**2
    out = norm * np.exp(expo)
    return out if out.ndim else float(out)


def _eig_index(obj: ObjectSpec, s: float) -> int:
    scale = max(1.0, max(abs(v) for v in obj.eigenvalues))
    for i, v in enumerate(obj.eigenvalues):
        if abs(v - s) <= 1e-9 * scale:
            return i
    raise ConfigError(f"{s!r} is not an eigenvalue of the measured observable")


def _rho_s0(obj: ObjectSpec, i: int, j: int, t: float) -> complex:
    """<s_i|rho_S^0(t)|s_j>: free dephasing when object energies are given."""
    val = complex(obj.rho_s[i, j])
    if obj.energies is not None and i != j and val != 0.0:
        val *= np.exp(-1j * t * (obj.energies[i] - obj.energies[j]))
    return val


def premeasurement_element(setup: MeasurementSetup, x, x_prime, s, s_prime, t):
    """Element <s,x|rho_PS(t)|s',x'> with the bath switched off.

    The object-pointer coupling merely drags the pointer Gaussian, so the
    element is the initial product evaluated at co-moving positions.
    """
    if t < 0:
        raise ConfigError("premeasurement evolution requires t >= 0")
    i = _eig_index(setup.object, s)
    j = _eig_index(setup.object, s_prime)
    eps = setup.epsilon
    dens = pointer_density(setup.pointer, x - t * eps * s, x_prime - t * eps * s_prime)
    return complex(setup.object.rho_s[i, j]) * dens


def sequential_t_dec(x, x_prime, b_var: float, alpha: int) -> float:
    """Static-bath dephasing time sqrt(2) / (|x'^a - x^a| <B^2>^{1/2}).

    An eigenvalue pair whose displaced positions satisfy x'^a = x^a never
    dephases in this caricature; the time is then infinite (not an error).
    """
    if b_var < 0:
        raise ConfigError("bath variance must be >= 0")
    if int(alpha) != alpha or alpha < 1:
        raise ConfigError("alpha must be a positive integer")
    gap = abs(float(x_prime) ** alpha - float(x) ** alpha)
    if gap == 0.0 or b_var == 0.0:
        return math.inf
    return math.sqrt(2.0) / (gap * math.sqrt(b_var))


def sequential_exponent(x, x_prime, t, t0, b_var: float, alpha: int) -> float:
    """Gaussian dephasing exponent (t - t0)^2 / t_dec(x, x')^2."""
    if t < t0:
        raise ConfigError("sequential exponent requires t >= t0")
    td = sequential_t_dec(x, x_prime, b_var, alpha)
    if math.isinf(td):
        return 0.0
    return ((t - t0) / td) ** 2


# --------------------------------------------------------------------------
# partial-equilibrium product form
# --------------------------------------------------------------------------


def rho_ps_element_partial(
    setup: MeasurementSetup,
    x,
    x_prime,
    s,
    s_prime,
    t,
    spec: QuadratureSpec = DEFAULT_QUAD,
) -> complex:
    """Product-form element for a factorized apparatus preparation.

    Object matrix element (with free dephasing phases), dragged pointer
    Gaussian, and the bath factor e^{-D - i phi} -- D and phi evaluated at
    the co-moving positions (x - t eps s, x' - t eps s').
    """
    if setup.variant is not Variant.PARTIAL_EQUILIBRIUM:
        raise ConfigError("rho_ps_element_partial requires the partial variant")
    if t < 0:
        raise ConfigError("t >= 0 required")
    i = _eig_index(setup.object, s)
    j = _eig_index(setup.object, s_prime)
    xs = x - t * setup.epsilon * s
    xps = x_prime - t * setup.epsilon * s_prime
    d, phi = d_exponent(setup, xs, xps, s, s_prime, t, spec)
    dens = pointer_density(setup.pointer, xs, xps)
    return _rho_s0(setup.object, i, j, t) * dens * complex(np.exp(-d - 1j * phi))


# --------------------------------------------------------------------------
# effective potential of the pre-thermalized apparatus
# --------------------------------------------------------------------------


def effective_potential(pointer: PointerSpec, bath: SpectralBath, alpha: int, x):
    """V_eff(x) = v2 x^2/2 - gamma0 x^{2 alpha}.

    The bath coupling softens the well; for a linear coupling the curvature
    at the origin drops to v2 - 2 gamma0 and the well disappears entirely
    once 2 gamma0 >= v2.
    """
    g0 = bath_mod.gamma0(bath)
    if alpha == 1 and 2.0 * g0 >= pointer.v2:
        raise StabilityError(
            f"linear coupling destabilizes the well: 2 gamma0 = {2.0 * g0:.6g} "
            f">= v2 = {pointer.v2:.6g}"
        )
    x = np.asarray(x, dtype=float)
    out = 0.5 * pointer.v2 * x**2 - g0 * x ** (2 * alpha)
    return out if out.ndim else float(out)


def w_eff(pointer: PointerSpec, bath: SpectralBath, alpha: int) -> float:
    """Distance between the two maxima of V_eff; infinite when confining."""
    g0 = bath_mod.gamma0(bath)
    if alpha == 1:
        if 2.0 * g0 >= pointer.v2:
            raise StabilityError("linear coupling destabilizes the well")
        return math.inf
    if g0 == 0.0:
        return math.inf
    return 2.0 * (pointer.v2 / (2.0 * alpha * g0)) ** (1.0 / (2 * alpha - 2))


def barrier_height(pointer: PointerSpec, bath: SpectralBath, alpha: int) -> float:
    """Height of the barriers surrounding the metastable well of V_eff."""
    half = 0.5 * w_eff(pointer, bath, alpha)
    if math.isinf(half):
        return math.inf
    # V_eff at its maximum x* = W_eff/2 collapses to (v2 x*^2 / 2)(1 - 1/alpha)
    return 0.5 * pointer.v2 * half**2 * (1.0 - 1.0 / alpha)


def _require_equilibrium(setup: MeasurementSetup):
    if setup.variant is not Variant.EQUILIBRIUM_APPARATUS:
        raise ConfigError("this operation requires the equilibrium-apparatus variant")


@lru_cache(maxsize=128)
def _z_eff(pointer: PointerSpec, bath: SpectralBath, alpha: int) -> float:
    """Partition integral of e^{-beta V_eff} over the regularized well.

    Confining cases close in a Gaussian; otherwise the integral runs over
    the window |x| <= W_eff between the barrier tops.
    """
    beta = bath.beta
    g0 = bath_mod.gamma0(bath)
    if alpha == 1:
        curv = pointer.v2 - 2.0 * g0
        if curv <= 0.0:
            raise StabilityError("linear coupling destabilizes the well")
        return math.sqrt(2.0 * math.pi / (beta * curv))
    if g0 == 0.0:
        return math.sqrt(2.0 * math.pi / (beta * pointer.v2))
    window = 0.5 * w_eff(pointer, bath, alpha)
    edges = np.linspace(-window, window, 257)
    half = 0.5 * (edges[1:] - edges[:-1])
    mid = 0.5 * (edges[1:] + edges[:-1])
    xs = (mid[:, None] + half[:, None] * _GL_NODES[None, :]).ravel()
    vals = np.exp(-beta * effective_potential(pointer, bath, alpha, xs))
    vals = vals.reshape(mid.size, _GL_NODES.size)
    return float(np.sum(vals @ _GL_WEIGHTS * half))


def r0_density(setup: MeasurementSetup, x, x_prime):
    """Reduced pointer element R_0(x,x') of the pre-thermalized apparatus."""
    _require_equilibrium(setup)
    beta = setup.bath.beta
    lam = setup.pointer.lam
    x = np.asarray(x, dtype=float)
    xp = np.asarray(x_prime, dtype=float)
    v_mean = 0.5 * (
        effective_potential(setup.pointer, setup.bath, setup.alpha, x)
        + effective_potential(setup.pointer, setup.bath, setup.alpha, xp)
    )
    out = np.exp(-beta * v_mean - 2.0 * math.pi**2 * (x - xp) ** 2 / lam**2)
    out = out / _z_eff(setup.pointer, setup.bath, setup.alpha)
    return out if np.ndim(out) else float(out)


# --------------------------------------------------------------------------
# R_t: friction drift integral and the xi-integral with closed special cases
# --------------------------------------------------------------------------


@lru_cache(maxsize=512)
def _friction_moments(
    bath: SpectralBath, alpha: int, t: float, spec: QuadratureSpec
) -> np.ndarray:
    """I_k(t) = int_0^t gamma(tau) tau^k dtau for k = 0..alpha.

    Evaluated in the frequency domain, (1/pi) int_0^inf J(w)/w Re P_k(w,t) dw,
    sharing the oscillatory-polynomial table with the decoherence kernels.
    """
    if t == 0.0:
        return np.zeros(alpha + 1)
    norms = _j_area(bath, shift=-1) * _p_bounds(alpha, t)

    def values(ws):
        p = osc_poly_table(alpha, ws, t)
        env = bath_mod.j_omega(bath, ws) / ws  # nodes are strictly interior
        return env[None, :] * p.real / norms[:, None]

    vec = _adaptive_panels(values, _upper_cutoff(bath, t, spec), spec) * norms / math.pi
    vec.setflags(write=False)
    return vec


def g_t(
    setup: MeasurementSetup,
    x,
    x_prime,
    s,
    s_prime,
    t,
    spec: QuadratureSpec = DEFAULT_QUAD,
):
    """Friction drift integral entering R_t.

    (8 pi^2)^{-a/2} lam_th^a int_0^t gamma(tau) (x'(-tau)^a - x(-tau)^a) dtau
    with the co-moving trajectories x(-tau) = x + tau eps s.  Vanishes at
    t = 0 and whenever the two trajectories carry equal powers.
    """
    _require_equilibrium(setup)
    alpha = setup.alpha
    eps = setup.epsilon
    sign = 1.0
    if t < 0:
        eps, t, sign = -eps, -t, -1.0
    cs, _ = _coeff_arrays(alpha, eps, x, x_prime, s, s_prime)
    moments = _friction_moments(setup.bath, alpha, float(t), spec)
    pref = (8.0 * math.pi**2) ** (-0.5 * alpha) * setup.pointer.lam**alpha
    val = sign * pref * np.einsum("k...,k->...", cs, moments)
    return val if np.ndim(val) else float(val)


_XI_LIMIT = 8.5  # Gaussian envelope truncation; e^{-72} tail


def _xi_bracket_flat(alpha, a_flat, g_flat, spec):
    """pi^{-1/2} int e^{-z^2} e^{-2i (z + a/2)^a g} dz for 1-D parameter arrays."""
    out = np.empty(a_flat.size, dtype=complex)
    for start in range(0, a_flat.size, 2048):
        av = a_flat[start : start + 2048, None]
        gv = g_flat[start : start + 2048, None]
        n_panels = 16
        prev = None
        for _ in range(spec.max_subdivisions + 1):
            edges = np.linspace(-_XI_LIMIT, _XI_LIMIT, n_panels + 1)
            half = 0.5 * (edges[1:] - edges[:-1])
            mid = 0.5 * (edges[1:] + edges[:-1])
            zs = (mid[:, None] + half[:, None] * _GL_NODES[None, :]).ravel()[None, :]
            vals = np.exp(-(zs**2) - 2j * gv * (zs + 0.5 * av) ** alpha)
            vals = vals.reshape(av.size, n_panels, _GL_NODES.size)
            cur = np.sum(vals @ _GL_WEIGHTS * half, axis=-1) / math.sqrt(math.pi)
            if prev is not None and np.max(np.abs(cur - prev)) <= (
                spec.rel_tol * max(1.0, float(np.max(np.abs(cur)))) + spec.abs_tol
            ):
                break
            prev = cur
            n_panels *= 2
        else:
            raise ConvergenceError(
                "xi-integral did not converge "
                f"within {spec.max_subdivisions} subdivisions"
            )
        out[start : start + 2048] = cur
    return out


def _xi_bracket(alpha, a, g, spec=DEFAULT_QUAD):
    a = np.asarray(a, dtype=float)
    g = np.asarray(g, dtype=float)
    shape = np.broadcast(a, g).shape
    a_flat = np.broadcast_to(a, shape).ravel()
    g_flat = np.broadcast_to(g, shape).ravel()
    out = _xi_bracket_flat(alpha, a_flat, g_flat, spec).reshape(shape)
    return out if shape else complex(out)


def r_t_numeric(
    setup: MeasurementSetup,
    x,
    x_prime,
    s,
    s_prime,
    t,
    spec: QuadratureSpec = DEFAULT_QUAD,
):
    """R_t by direct quadrature of the one-dimensional oscillatory integral.

    Valid for any coupling power; serves as the reference for the closed
    forms at alpha = 1, 2.
    """
    _require_equilibrium(setup)
    g = g_t(setup, x, x_prime, s, s_prime, t, spec)
    a = _a_parameter(setup, x, x_prime)
    out = r0_density(setup, x, x_prime) * _xi_bracket(setup.alpha, a, g, spec)
    return out if np.ndim(out) else complex(out)


def _a_parameter(setup, x, x_prime):
    x = np.asarray(x, dtype=float)
    xp = np.asarray(x_prime, dtype=float)
    return 2.0 * math.sqrt(2.0) * math.pi * (x + xp) / setup.pointer.lam


def r_t(
    setup: MeasurementSetup,
    x,
    x_prime,
    s,
    s_prime,
    t,
    spec: QuadratureSpec = DEFAULT_QUAD,
):
    """Pointer factor R_t(x,x';s,s') of the pre-thermalized apparatus.

    Closed Gaussian-integral forms for alpha = 1 (R_0 e^{-g^2 - i a g}) and
    alpha = 2; the general power falls back to numeric quadrature.  Reduces
    to R_0 at t = 0.
    """
    _require_equilibrium(setup)
    alpha = setup.alpha
    g = np.asarray(g_t(setup, x, x_prime, s, s_prime, t, spec))
    a = _a_parameter(setup, x, x_prime)
    r0 = r0_density(setup, x, x_prime)
    if alpha == 1:
        out = r0 * np.exp(-(g**2) - 1j * a * g)
    elif alpha == 2:
        denom = 1.0 + 4.0 * g**2
        bracket = (1.0 + 2j * g) ** (-0.5) * np.exp(
            -((g * a) ** 2) * (1.0 - 2j * g) / denom - 0.5j * g * a**2
        )
        out = r0 * bracket
    else:
        out = r0 * _xi_bracket(alpha, a, g, spec)
    return out if np.ndim(out) else complex(out)


def rho_ps_element_equilibrium(
    setup: MeasurementSetup,
    x,
    x_prime,
    s,
    s_prime,
    t,
    spec: QuadratureSpec = DEFAULT_QUAD,
) -> complex:
    """Product-form element for the pre-thermalized apparatus preparation."""
    _require_equilibrium(setup)
    if t < 0:
        raise ConfigError("t >= 0 required")
    i = _eig_index(setup.object, s)
    j = _eig_index(setup.object, s_prime)
    xs = x - t * setup.epsilon * s
    xps = x_prime - t * setup.epsilon * s_prime
    d, phi = d_exponent(setup, xs, xps, s, s_prime, t, spec)
    rt = r_t(setup, xs, xps, s, s_prime, t, spec)
    return _rho_s0(setup.object, i, j, t) * rt * complex(np.exp(-d - 1j * phi))


# --------------------------------------------------------------------------
# grid assembly, reduced pointer state, Wigner transform
# --------------------------------------------------------------------------


def default_x_grid(
    setup: MeasurementSetup, t: float, n: int = 257, margin: float = 4.0
) -> np.ndarray:
    """Position grid covering every dragged peak at +-margin pointer widths."""
    d = setup.pointer.delta
    evs = setup.object.eigenvalues
    lo = setup.epsilon * t * min(min(evs), 0.0) - margin * d
    hi = setup.epsilon * t * max(max(evs), 0.0) + margin * d
    return np.linspace(lo, hi, n)


def _element_matrix(setup, i, j, x_grid, t, spec):
    """Dense matrix of <s_i, x|rho_PS(t)|s_j, x'> over the grid."""
    s = setup.object.eigenvalues[i]
    sp = setup.object.eigenvalues[j]
    rho_el = _rho_s0(setup.object, i, j, t)
    if rho_el == 0.0:
        return np.zeros((x_grid.size, x_grid.size), dtype=complex)
    xs = x_grid[:, None] - t * setup.epsilon * s
    xps = x_grid[None, :] - t * setup.epsilon * sp
    d, phi = _d_phi(setup, xs, xps, s, sp, t, spec)
    d = np.where((d < 0) & (d > -1e-13), 0.0, d)
    if setup.variant is Variant.EQUILIBRIUM_APPARATUS:
        pointer_factor = r_t(setup, xs, xps, s, sp, t, spec)
    else:
        pointer_factor = pointer_density(setup.pointer, xs, xps)
    return rho_el * pointer_factor * np.exp(-d - 1j * phi)


def grid_state(
    setup: MeasurementSetup,
    t: float,
    x_grid: Optional[np.ndarray] = None,
    spec: QuadratureSpec = DEFAULT_QUAD,
) -> GridState:
    """Assemble every eigenvalue-pair block of rho_PS(t) on a position grid.

    The (j, i) block is filled from the (i, j) block by conjugate transpose,
    which both halves the work and makes hermiticity exact.
    """
    if t < 0:
        raise ConfigError("t >= 0 required")
    if x_grid is None:
        x_grid = default_x_grid(setup, t)
    x_grid = np.asarray(x_grid, dtype=float)
    n = len(setup.object.eigenvalues)
    elements = {}
    for i in range(n):
        for j in range(i, n):
            mat = _element_matrix(setup, i, j, x_grid, float(t), spec)
            elements[(i, j)] = mat
            if j != i:
                elements[(j, i)] = mat.conj().T
    return GridState(x_grid=x_grid, elements=elements, t=float(t))


def pointer_reduced(
    setup: MeasurementSetup,
    t: float,
    x_grid: Optional[np.ndarray] = None,
    spec: QuadratureSpec = DEFAULT_QUAD,
) -> GridState:
    """Reduced pointer state: object index traced out on the grid.

    Only diagonal eigenvalue blocks contribute, so off-diagonal blocks are
    never assembled.  Long after the decoherence time the diagonal shows one
    peak per populated eigenvalue, centred at x = eps t s.
    """
    if t < 0:
        raise ConfigError("t >= 0 required")
    if x_grid is None:
        x_grid = default_x_grid(setup, t)
    x_grid = np.asarray(x_grid, dtype=float)
    total = np.zeros((x_grid.size, x_grid.size), dtype=complex)
    for i in range(len(setup.object.eigenvalues)):
        if setup.object.rho_s[i, i].real > 0.0:
            total = total + _element_matrix(setup, i, i, x_grid, float(t), spec)
    return GridState(x_grid=x_grid, elements={(0, 0): total}, t=float(t))


def _coherence_sigma(x_grid: np.ndarray, rho: np.ndarray) -> float:
    """e^{-1/2} half-width of |rho(x-y, x+y)| in y at the dominant peak."""
    diag = np.abs(np.diagonal(rho))
    c = int(np.argmax(diag))
    n = x_grid.size
    dx = x_grid[1] - x_grid[0]
    kmax = min(c, n - 1 - c)
    if kmax < 1 or diag[c] == 0.0:
        return math.inf
    target = diag[c] * math.exp(-0.5)
    prev = diag[c]
    for k in range(1, kmax + 1):
        val = abs(rho[c - k, c + k])
        if val <= target:
            # linear interpolation between samples k-1 and k
            frac = (prev - target) / max(prev - val, 1e-300)
            return (k - 1 + frac) * dx
        prev = val
    return math.inf


def _drift_bound(x_grid: np.ndarray, rho: np.ndarray) -> float:
    """Largest momentum displacement read off the antidiagonal phase slope.

    The bath drags the pointer in momentum as well as position, so the
    coherence rho(x-y, x+y) carries a phase ~ e^{2i p_bar y}.  The slope is
    measured at every position carrying appreciable density.  A phase step
    between neighbouring samples close to pi means the drift sits near the
    sampling Nyquist limit and the grid cannot represent the state (steps
    beyond pi alias silently, which no sampled representation can detect).
    """
    diag = np.abs(np.diagonal(rho))
    n = x_grid.size
    dx = x_grid[1] - x_grid[0]
    top = diag.max()
    if top == 0.0:
        return 0.0
    drift = 0.0
    for c in np.nonzero(diag >= 0.3 * top)[0]:
        if c < 1 or c > n - 2:
            continue
        val = rho[c - 1, c + 1]
        if abs(val) == 0.0:
            continue
        step = float(np.angle(val)) - float(np.angle(rho[c, c]))
        step = (step + math.pi) % (2.0 * math.pi) - math.pi
        if abs(step) > 2.2:
            raise ResolutionError(
                "antidiagonal phase advances by more than 2.2 rad per grid "
                "step; refine x_grid to resolve the momentum drift"
            )
        drift = max(drift, abs(step) / (2.0 * dx))
    return drift


def wigner(
    setup: MeasurementSetup,
    t: float,
    x_grid: Optional[np.ndarray] = None,
    p_grid: Optional[np.ndarray] = None,
    spec: QuadratureSpec = DEFAULT_QUAD,
) -> WignerGrid:
    """Wigner map W(x,p) = (1/pi) int dy e^{2ipy} rho_P(x-y, x+y) on a grid.

    The transform runs over the antidiagonals of the sampled reduced density
    matrix, so x_grid must be uniform.  When no momentum grid is supplied
    one is built from the measured coherence width (decoherence shortens the
    coherence length and broadens the momentum support accordingly).  The
    default position grid carries a wider margin than the density default:
    antidiagonals are truncated by the grid edges, so every peak must sit
    deep inside the window for the transform to be accurate.
    """
    if x_grid is None:
        x_grid = default_x_grid(setup, t, margin=8.0)
    reduced = pointer_reduced(setup, t, x_grid, spec)
    xg = reduced.x_grid
    dx = float(xg[1] - xg[0])
    if not np.allclose(np.diff(xg), dx, rtol=1e-9, atol=0.0):
        raise ConfigError("wigner transform requires a uniform x_grid")
    if setup.pointer.delta < 2.0 * dx:
        raise ResolutionError(
            f"pointer peak width {setup.pointer.delta:.3g} spans fewer than two "
            f"grid steps of {dx:.3g}"
        )
    rho = reduced.elements[(0, 0)]
    sigma_y = min(_coherence_sigma(xg, rho), setup.pointer.lam / (4.0 * math.pi))
    if sigma_y < 2.0 * dx:
        raise ResolutionError(
            f"coherence width {sigma_y:.3g} spans fewer than two grid steps "
            f"of {dx:.3g}; refine x_grid"
        )
    drift = _drift_bound(xg, rho)
    sigma_p = 0.5 / sigma_y
    if p_grid is None:
        half = drift + 5.0 * sigma_p
        n_p = max(129, 2 * math.ceil(2.0 * half / sigma_p) + 1)
        p_grid = np.linspace(-half, half, n_p)
    p_grid = np.asarray(p_grid, dtype=float)
    if p_grid.size > 2:
        dp = p_grid[1] - p_grid[0]
        if sigma_p < 2.0 * dp:
            raise ResolutionError("p_grid too coarse for the momentum peak width")

    return WignerGrid(x_grid=xg, p_grid=p_grid, w=_wigner_transform(xg, rho, p_grid))


def _wigner_transform(x_grid: np.ndarray, rho: np.ndarray, p_grid: np.ndarray):
    """(1/pi) int dy e^{2ipy} rho(x-y, x+y) over the sampled antidiagonals.

    Trapezoid in y on each antidiagonal (half weight at the two ends where
    the diagonal leaves the grid); the y reach shrinks towards the edges, so
    callers must keep all density well inside the window.
    """
    n = x_grid.size
    dx = float(x_grid[1] - x_grid[0])
    ks = np.arange(-(n - 1), n)
    idx_c = np.arange(n)[:, None]
    dist = np.minimum(idx_c, n - 1 - idx_c)  # antidiagonal reach per row
    valid = np.abs(ks)[None, :] <= dist
    rows = np.where(valid, idx_c - ks[None, :], 0)
    cols = np.where(valid, idx_c + ks[None, :], 0)
    samples = np.where(valid, rho[rows, cols], 0.0)
    weights = np.where(valid, dx, 0.0)
    edge = valid & (np.abs(ks)[None, :] == dist) & (dist > 0)
    weights = np.where(edge, 0.5 * dx, weights)
    phases = np.exp(2j * np.outer(ks * dx, p_grid))
    return ((samples * weights) @ phases).real / math.pi
