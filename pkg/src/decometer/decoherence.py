r"""Decoherence exponent, phase, and the measurement time scales.

Coupling layout (hbar = k_B = 1): the object observable S couples to the
pointer momentum, H_PS = eps * S * P, and the pointer position couples to the
bath agent, H_PB = B * X^alpha.  An off-diagonal object-pointer element
acquires the damping factor e^{-D - i phi} with

    D   = (1/2) int_0^t int_0^t f(tau1) f(tau2) Re h(tau1 - tau2)
    phi = - int_{0 <= tau2 < tau1 <= t} f(tau1) g(tau2) Im h(tau1 - tau2)
    f(tau) = (x' + tau eps s')^alpha - (x + tau eps s)^alpha
    g(tau) = (x' + tau eps s')^alpha + (x + tau eps s)^alpha .

Both are evaluated in the frequency domain.  Expanding the binomials,
f(tau) = sum_k c_k tau^k with

    c_k = C(alpha, k) [x'^{alpha-k} (eps s')^k - x^{alpha-k} (eps s)^k] ,

so that D = sum_{kl} c_k c_l Q_kl(t) and phi = sum_{kl} f_k g_l S_kl(t) with
coordinate-independent kernel matrices

    Q_kl = (1/2pi) int_0^inf Re h-hat(w) Re[P_k(w,t) P_l(w,t)*] dw
    S_kl = (1/pi)  int_0^inf J(w) Im M_kl(w,t) dw
    P_k(w,t)  = int_0^t u^k e^{-iwu} du           (closed form)
    M_kl(w,t) = int_0^t dtau tau^k e^{iw tau} P_l(w, tau)   (closed form) .

Q and S depend only on (bath, alpha, t) and are cached, making grid
evaluation of density-matrix elements O(alpha^2) per point.

Time-scale summary for a pair (s, s') with c_alpha = |s'^a - s^a|/|s' - s|^a:

    t_ent  = Delta / (eps |s' - s|)
    interaction regime (t_dec << t_B):   t_dec^{a+1} = sqrt(2)(a+1) /
                                           (eps^a |s'^a - s^a| <B^2>^{1/2})
    Markov, Ohmic (t_dec >> T_B):        t_dec^{2a+1} = (2a+1) /
                                           (eps^{2a} (s'^a - s^a)^2 M_0)
    Markov, super-Ohmic:                 t_dec^{2a}   = 2 /
                                           (eps^{2a} (s'^a - s^a)^2 |M_1|)
    zero-T Markov: super-Ohmic closed form, Ohmic implicit log relation
    with k_alpha = k_1 - sum_{j<alpha} 1/j,  k_1 = euler_gamma / 2 .
"""
from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple, Optional, Sequence, Tuple

import numpy as np
from scipy.special import comb

from . import bath as bath_mod
from .bath import SpectralBath
from .errors import (
    ConfigError,
    ConvergenceError,
    DecoherenceFreeError,
    DecometerError,
    DegenerateSpectrumError,
    IterationError,
    RegimeWarning,
    SqueezeWarning,
    StabilityError,
)
from .numerics import (
    DEFAULT_QUAD,
    QuadratureSpec,
    _GL_NODES,
    _GL_WEIGHTS,
    find_root_increasing,
    osc_poly_table,
)

__all__ = [
    "COHERENCE_FLOOR",
    "ALPHA_CAP",
    "Variant",
    "ObjectSpec",
    "PointerSpec",
    "MeasurementSetup",
    "DecResult",
    "DirectCouplingResult",
    "ValidationReport",
    "K1",
    "c_alpha",
    "k_alpha",
    "delta_th",
    "lambda_th",
    "equilibrium_pointer",
    "d_exponent",
    "d_peak",
    "d_peak_rate",
    "t_ent",
    "t_ent_global",
    "t_class",
    "eta",
    "eta_th",
    "t_dec_exact",
    "t_dec_interaction",
    "t_dec_markov",
    "t_dec_zero_t_markov",
    "measurement_t_dec",
    "direct_coupling_t_dec",
    "validate_setup",
]

# pairs with |<s|rho_S|s'>| below this floor do not participate in delta_s,
# measurement_t_dec, or the coupled-pair scans
COHERENCE_FLOOR = 1e-12

# binomial-expansion cap on the pointer-bath exponent
ALPHA_CAP = 6

# log-relation constant of the zero-T Ohmic decoherence time
K1 = float(np.euler_gamma) / 2.0


class Variant(enum.Enum):
    PARTIAL_EQUILIBRIUM = "partial_equilibrium"
    EQUILIBRIUM_APPARATUS = "equilibrium_apparatus"


@dataclass(frozen=True, eq=False)
class ObjectSpec:
    """Measured observable: distinct eigenvalues, object state, optional energies.

    energies, when given, describe a free object Hamiltonian commuting with S
    (pure dephasing); coherences then rotate as e^{-i t (E_s - E_s')}.
    """

    eigenvalues: Tuple[float, ...]
    rho_s: np.ndarray
    energies: Optional[Tuple[float, ...]] = None

    def __post_init__(self):
        evs = tuple(float(s) for s in self.eigenvalues)
        object.__setattr__(self, "eigenvalues", evs)
        n = len(evs)
        if n < 1:
            raise ConfigError("at least one eigenvalue required")
        scale = max(1.0, max(abs(s) for s in evs))
        for i in range(n):
            for j in range(i + 1, n):
                if abs(evs[i] - evs[j]) <= 1e-12 * scale:
                    raise ConfigError("eigenvalues must be pairwise distinct")
        rho = np.array(self.rho_s, dtype=complex)
        if rho.shape != (n, n):
            raise ConfigError("rho_s must be square and match the eigenvalue count")
        if not np.allclose(rho, rho.conj().T, atol=1e-10):
            raise ConfigError("rho_s must be Hermitian")
        if abs(np.trace(rho).real - 1.0) > 1e-9 or abs(np.trace(rho).imag) > 1e-9:
            raise ConfigError("rho_s must have unit trace")
        if np.linalg.eigvalsh(rho).min() < -1e-12:
            raise ConfigError("rho_s must be positive semidefinite")
        object.__setattr__(self, "rho_s", rho)
        if self.energies is not None:
            en = tuple(float(e) for e in self.energies)
            if len(en) != n:
                raise ConfigError("energies must match the eigenvalue count")
            object.__setattr__(self, "energies", en)


@dataclass(frozen=True)
class PointerSpec:
    """Gaussian pointer state: position width delta, momentum-scale length lam.

    lam <= 4 pi delta is the uncertainty principle; lam * delta/(2 pi) far from
    (mass * v2)^{-1/2} means a strongly squeezed initial state and only draws a
    warning.  v2 is the curvature V''(0) of the confining potential;
    delta_class is the optional macroscopic readout scale.
    """

    delta: float
    lam: float
    mass: float
    v2: float
    delta_class: Optional[float] = None

    def __post_init__(self):
        if not (self.delta > 0 and self.lam > 0 and self.mass > 0 and self.v2 > 0):
            raise ConfigError("delta, lam, mass, v2 must all be > 0")
        if self.lam > 4.0 * math.pi * self.delta * (1.0 + 1e-12):
            raise ConfigError("uncertainty principle violated: lam > 4 pi delta")
        ratio = self.squeeze_ratio
        if not (1.0 / 3.0 <= ratio <= 3.0):
            warnings.warn(
                f"pointer is squeezed: lam*delta*sqrt(M v2)/(2 pi) = {ratio:.3g} "
                "outside [1/3, 3]",
                SqueezeWarning,
                stacklevel=2,
            )

    @property
    def squeeze_ratio(self):
        """lam * delta * sqrt(mass * v2) / (2 pi); ~1 for an unsqueezed pointer."""
        return self.lam * self.delta * math.sqrt(self.mass * self.v2) / (2.0 * math.pi)

    @property
    def t_p(self):
        """Pointer dynamical time T_P = sqrt(mass / v2)."""
        return math.sqrt(self.mass / self.v2)


def delta_th(bath: SpectralBath, v2: float) -> float:
    """Thermal position width (beta v2)^{-1/2}."""
    if bath.zero_temperature:
        raise ConfigError("thermal width undefined at zero temperature")
    return 1.0 / math.sqrt(bath.beta * v2)


def lambda_th(bath: SpectralBath, mass: float) -> float:
    """Thermal coherence length 2 pi sqrt(beta / mass)."""
    if bath.zero_temperature:
        raise ConfigError("thermal length undefined at zero temperature")
    return 2.0 * math.pi * math.sqrt(bath.beta / mass)


def equilibrium_pointer(
    bath: SpectralBath,
    mass: float,
    v2: float,
    delta_class: Optional[float] = None,
) -> PointerSpec:
    """Pointer at apparatus equilibrium: delta = delta_th, lam = lambda_th."""
    return PointerSpec(
        delta=delta_th(bath, v2),
        lam=lambda_th(bath, mass),
        mass=mass,
        v2=v2,
        delta_class=delta_class,
    )


@dataclass(frozen=True, eq=False)
class MeasurementSetup:
    """Complete object-pointer-bath configuration.

    t_s is an optional object evolution time scale used only in validity
    diagnostics; it defaults to infinity (observable commuting with the
    object Hamiltonian, pure dephasing).
    """

    epsilon: float
    alpha: int
    object: ObjectSpec
    pointer: PointerSpec
    bath: SpectralBath
    variant: Variant = Variant.PARTIAL_EQUILIBRIUM
    t_s: float = math.inf

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ConfigError("epsilon must be > 0")
        if int(self.alpha) != self.alpha or not (1 <= self.alpha <= ALPHA_CAP):
            raise ConfigError(f"alpha must be an integer in [1, {ALPHA_CAP}]")
        object.__setattr__(self, "alpha", int(self.alpha))
        if not isinstance(self.variant, Variant):
            raise ConfigError("variant must be a Variant")
        if self.variant is Variant.EQUILIBRIUM_APPARATUS:
            if self.bath.zero_temperature:
                raise ConfigError("equilibrium apparatus requires finite temperature")
            d_th = delta_th(self.bath, self.pointer.v2)
            l_th = lambda_th(self.bath, self.pointer.mass)
            if (
                abs(self.pointer.delta - d_th) > 1e-9 * d_th
                or abs(self.pointer.lam - l_th) > 1e-9 * l_th
            ):
                raise ConfigError(
                    "equilibrium apparatus requires delta = (beta v2)^{-1/2} "
                    "and lam = 2 pi (beta/mass)^{1/2}; use equilibrium_pointer()"
                )


class DecResult(NamedTuple):
    """Decoherence exponent d >= 0 and accumulated phase phi."""

    d: float
    phi: float


class DirectCouplingResult(NamedTuple):
    """Hypothetical direct object-bath dephasing time and its ratio to the
    pointer-mediated Markov decoherence time."""

    t_dec: float
    ratio_to_markov: float


# --------------------------------------------------------------------------
# kernel matrices
# --------------------------------------------------------------------------


def _upper_cutoff(bath: SpectralBath, t: float, spec: QuadratureSpec) -> float:
    """Frequency cutoff w_D (sqrt(ln 1/abs_tol) + 2) for the kernel integrals.

    Every kernel integrand carries the Gaussian spectral factor, so the tail
    past this point is below tolerance whatever t is; the oscillatory factors
    are bounded and only demand panel refinement, not reach.
    """
    root_log = math.sqrt(math.log(1.0 / max(spec.abs_tol, 1e-300)))
    return bath.w_D * (root_log + 2.0)


def _j_area(bath: SpectralBath, shift: int = 0) -> float:
    """int_0^inf w^shift J(w) dw = gamma_hat w_D^{m+shift+1} Gamma((m+shift+1)/2) / 2."""
    p = bath.m + shift
    return 0.5 * bath.gamma_hat * bath.w_D ** (p + 1) * math.gamma(0.5 * (p + 1))


def _adaptive_panels(values_fn, upper, spec):
    """Vector-valued analogue of the Gaussian-tail quadrature.

    values_fn(w) must return an array (..., len(w)) of integrand components;
    all components share panel refinement and must converge together.
    """
    n_panels = 64
    prev = None
    for _ in range(spec.max_subdivisions + 1):
        edges = np.linspace(0.0, upper, n_panels + 1)
        half = 0.5 * (edges[1:] - edges[:-1])
        mid = 0.5 * (edges[1:] + edges[:-1])
        xs = (mid[:, None] + half[:, None] * _GL_NODES[None, :]).ravel()
        ys = values_fn(xs)
        ys = ys.reshape(ys.shape[:-1] + (n_panels, _GL_NODES.size))
        cur = np.sum(ys @ _GL_WEIGHTS * half, axis=-1)
        if prev is not None:
            scale = np.max(np.abs(cur)) if cur.size else 0.0
            if np.max(np.abs(cur - prev)) <= spec.rel_tol * scale + spec.abs_tol:
                return cur
            prev = cur
        else:
            prev = cur
        n_panels *= 2
    raise ConvergenceError(
        "kernel quadrature did not converge "
        f"within {spec.max_subdivisions} subdivisions",
        estimates=(float(np.max(np.abs(prev))), float(np.max(np.abs(cur)))),
    )


@lru_cache(maxsize=1024)
def _p_bounds(alpha: int, t: float) -> np.ndarray:
    """A-priori bounds |P_k(w, t)| <= t^{k+1}/(k+1), k = 0..alpha.

    The kernel quadratures divide by these (and by the spectral area) so the
    convergence test always sees O(1) components; otherwise the absolute
    tolerance floor swallows the t^{k+l+2}-suppressed entries at short times
    and the panel loop stops before resolving the spectral peak.
    """
    ks = np.arange(alpha + 1)
    return t ** (ks + 1.0) / (ks + 1.0)


def _q_peak(bath: SpectralBath, alpha: int, t: float, spec: QuadratureSpec) -> float:
    """Q_aa(t): the single kernel entry needed by the peak exponent."""
    if t == 0.0:
        return 0.0
    norm = math.pi * bath_mod.b_variance(bath, spec) * _p_bounds(alpha, t)[alpha] ** 2

    def values(ws):
        p = osc_poly_table(alpha, ws, t)[alpha]
        return bath_mod.re_h_hat(bath, ws) * (p.real**2 + p.imag**2) / norm

    val = _adaptive_panels(values, _upper_cutoff(bath, t, spec), spec)
    return float(val) * norm / (2.0 * math.pi)


@lru_cache(maxsize=256)
def _q_matrix(bath: SpectralBath, alpha: int, t: float, spec: QuadratureSpec):
    """Full kernel matrix Q_kl(t), k,l = 0..alpha.  Symmetric."""
    if t == 0.0:
        return np.zeros((alpha + 1, alpha + 1))
    pb = _p_bounds(alpha, t)
    norms = math.pi * bath_mod.b_variance(bath, spec) * np.outer(pb, pb)

    def values(ws):
        p = osc_poly_table(alpha, ws, t)
        rh = bath_mod.re_h_hat(bath, ws)
        raw = rh[None, None, :] * (p[:, None, :] * p[None, :, :].conj()).real
        return raw / norms[:, :, None]

    mat = _adaptive_panels(values, _upper_cutoff(bath, t, spec), spec)
    mat = mat * norms / (2.0 * math.pi)
    mat.setflags(write=False)
    return mat


def _m_table(alpha: int, ws: np.ndarray, t: float) -> np.ndarray:
    """Ordered double integrals M_kl(w,t) = int_0^t tau^k e^{iw tau} P_l(w,tau) dtau.

    Closed form for |w t| above the Taylor switch:
        M_kl = a_l conj(P_k(w,t))
               - sum_{j=0..l} (l!/(l-j)!) (iw)^{-(j+1)} t^{k+l-j+1}/(k+l-j+1)
    with a_l = l! (iw)^{-(l+1)}; double power series below the switch.
    """
    ws = np.asarray(ws, dtype=float)
    out = np.empty((alpha + 1, alpha + 1, ws.size), dtype=complex)
    if t == 0.0:
        out[:] = 0.0
        return out
    small = np.abs(ws * t) < 0.5
    big = ~small

    if np.any(big):
        wb = ws[big]
        p_tab = osc_poly_table(alpha, wb, t)
        iw_inv = 1.0 / (1j * wb)  # (iw)^{-1}
        # powers (iw)^{-(j+1)}, j = 0..alpha
        ipow = np.array([iw_inv ** (j + 1) for j in range(alpha + 1)])
        for l in range(alpha + 1):
            a_l = math.factorial(l) * ipow[l]
            for k in range(alpha + 1):
                acc = a_l * p_tab[k].conj()
                for j in range(l + 1):
                    coeff = math.factorial(l) / math.factorial(l - j)
                    power = k + l - j + 1
                    acc = acc - coeff * ipow[j] * t**power / power
                out[k, l, big] = acc

    if np.any(small):
        z = ws[small] * t  # dimensionless
        for k in range(alpha + 1):
            for l in range(alpha + 1):
                acc = np.zeros_like(z, dtype=complex)
                # sum over p (outer e^{+iw tau}) and q (inner e^{-iw u})
                for p in range(26):
                    for q in range(26 - p):
                        num = (1j * z) ** p * (-1j * z) ** q
                        den = (
                            math.factorial(p)
                            * math.factorial(q)
                            * (l + q + 1)
                            * (k + l + p + q + 2)
                        )
                        acc += num / den
                out[k, l, small] = acc * t ** (k + l + 2)
    return out


@lru_cache(maxsize=256)
def _s_matrix(bath: SpectralBath, alpha: int, t: float, spec: QuadratureSpec):
    """Phase kernel S_kl(t) = (1/pi) int_0^inf J(w) Im M_kl(w,t) dw."""
    if t == 0.0:
        return np.zeros((alpha + 1, alpha + 1))
    pb = _p_bounds(alpha, t)
    norms = _j_area(bath) * np.outer(pb, pb)

    def values(ws):
        m = _m_table(alpha, ws, t)
        raw = bath_mod.j_omega(bath, ws)[None, None, :] * m.imag
        return raw / norms[:, :, None]

    mat = _adaptive_panels(values, _upper_cutoff(bath, t, spec), spec) * norms / math.pi
    mat.setflags(write=False)
    return mat


# --------------------------------------------------------------------------
# coefficient expansions
# --------------------------------------------------------------------------


def _coeff_arrays(alpha, eps, x, xp, s, sp):
    """Binomial coefficient stacks c_k (difference) and g_k (sum).

    x and xp may be numpy arrays (broadcast against each other); returns two
    stacks of shape (alpha+1,) + broadcast shape.
    """
    x = np.asarray(x, dtype=float)
    xp = np.asarray(xp, dtype=float)
    shape = np.broadcast(x, xp).shape
    cs = np.empty((alpha + 1,) + shape)
    gs = np.empty((alpha + 1,) + shape)
    for k in range(alpha + 1):
        b = comb(alpha, k, exact=True)
        left = b * xp ** (alpha - k) * (eps * sp) ** k
        right = b * x ** (alpha - k) * (eps * s) ** k
        cs[k] = left - right
        gs[k] = left + right
    return cs, gs


def _d_phi(setup, x, xp, s, sp, t, spec=DEFAULT_QUAD):
    """Decoherence exponent and phase, broadcasting over x, xp arrays.

    Negative t is the oriented continuation of both double integrals, which
    gives D_{-T}(eps) = D_T(-eps) and phi_{-T}(eps) = -phi_T(-eps).
    """
    alpha = setup.alpha
    eps = setup.epsilon
    sign_t = 1.0
    if t < 0.0:
        eps, t, sign_t = -eps, -t, -1.0
    cs, gs = _coeff_arrays(alpha, eps, x, xp, s, sp)
    q = _q_matrix(setup.bath, alpha, float(t), spec)
    smat = _s_matrix(setup.bath, alpha, float(t), spec)
    d = np.einsum("k...,l...,kl->...", cs, cs, q)
    phi = sign_t * np.einsum("k...,l...,kl->...", cs, gs, smat)
    return d, phi


def d_exponent(setup, x, x_prime, s, s_prime, t, spec=DEFAULT_QUAD) -> DecResult:
    """Decoherence exponent D and phase phi for one element and time.

    Computed in the frequency domain from the cached kernel matrices; equals
    the direct double time integral (which the test suite evaluates
    independently).  Negative t is permitted for the time-reversal identity.
    """
    d, phi = _d_phi(setup, float(x), float(x_prime), float(s), float(s_prime), t, spec)
    d = float(d)
    # the exponent is a positive-type quadratic form; clip quadrature noise
    if d < 0 and d > -1e-13:
        d = 0.0
    return DecResult(d, float(phi))


def c_alpha(s: float, s_prime: float, alpha: int) -> float:
    """Gap-geometry factor |s'^a - s^a| / |s' - s|^a; identically 1 at a = 1."""
    if s == s_prime:
        raise ValueError("c_alpha requires s != s_prime")
    if alpha == 1:
        return 1.0
    return abs(s_prime**alpha - s**alpha) / abs(s_prime - s) ** alpha


def _gap_power(setup, s, sp) -> float:
    return sp**setup.alpha - s**setup.alpha


def d_peak(setup, s, s_prime, t, spec=DEFAULT_QUAD) -> float:
    """Peak decoherence exponent D^peak(t) = D_t(0, 0; s, s').

    Only the k = alpha binomial term survives at the peak, so this is a
    single kernel entry:  (eps^{2a}/2)(s'^a - s^a)^2 * (2 Q_aa).
    """
    if t < 0:
        raise ValueError("d_peak requires t >= 0")
    gap = _gap_power(setup, s, s_prime)
    if gap == 0.0:
        return 0.0
    c = setup.epsilon**setup.alpha * gap
    return c * c * _q_peak(setup.bath, setup.alpha, float(t), spec)


def d_peak_rate(setup, s, s_prime, t, spec=DEFAULT_QUAD) -> float:
    """dD^peak/dt as a single frequency integral:

    rate = A t^a (1/pi) int_0^inf Re h-hat(w) Re[e^{iwt} P_a(w,t)] dw,
    A = eps^{2a} (s'^a - s^a)^2; strictly positive for a coupled pair.
    """
    if not t > 0:
        raise ValueError("d_peak_rate requires t > 0")
    gap = _gap_power(setup, s, s_prime)
    if gap == 0.0:
        return 0.0
    alpha = setup.alpha
    b = setup.bath
    norm = math.pi * bath_mod.b_variance(b, spec) * _p_bounds(alpha, t)[alpha]

    def values(ws):
        p = osc_poly_table(alpha, ws, t)[alpha]
        return bath_mod.re_h_hat(b, ws) * (np.exp(1j * ws * t) * p).real / norm

    integral = _adaptive_panels(values, _upper_cutoff(b, t, spec), spec)
    amp = (setup.epsilon ** (2 * alpha)) * gap * gap
    return amp * t**alpha * float(integral) * norm / math.pi


# --------------------------------------------------------------------------
# time scales
# --------------------------------------------------------------------------


def _pair_list(obj: ObjectSpec):
    """Index pairs (i, j), i < j, whose coherence exceeds the floor."""
    n = len(obj.eigenvalues)
    out = []
    for i in range(n):
        for j in range(i + 1, n):
            if abs(obj.rho_s[i, j]) > COHERENCE_FLOOR:
                out.append((i, j))
    return out


def t_ent(setup, s, s_prime) -> float:
    """Pairwise entanglement time Delta / (eps |s' - s|)."""
    if s == s_prime:
        raise ValueError("t_ent requires s != s_prime")
    return setup.pointer.delta / (setup.epsilon * abs(s_prime - s))


def _delta_s(setup) -> float:
    pairs = _pair_list(setup.object)
    if not pairs:
        raise DegenerateSpectrumError(
            "no coupled eigenvalue pair (rho_S has no off-diagonal coherence)"
        )
    evs = setup.object.eigenvalues
    return min(abs(evs[i] - evs[j]) for i, j in pairs)


def t_ent_global(setup) -> float:
    """Entanglement time of the slowest-resolving coupled pair."""
    return setup.pointer.delta / (setup.epsilon * _delta_s(setup))


def t_class(setup) -> float:
    """Classical readout time Delta_class / (eps delta_s)."""
    if setup.pointer.delta_class is None:
        raise ConfigError("t_class requires pointer.delta_class")
    return setup.pointer.delta_class / (setup.epsilon * _delta_s(setup))


def eta(setup) -> float:
    """Dimensionless pointer-bath coupling strength.

    Finite temperature: eta = <B^2>^{1/2} Delta^alpha beta.
    Zero temperature:   eta_D = <B^2>^{1/2} Delta^alpha / w_D.
    """
    bvar = bath_mod.b_variance(setup.bath)
    scale = setup.bath.beta if not setup.bath.zero_temperature else 1.0 / setup.bath.w_D
    return math.sqrt(bvar) * setup.pointer.delta**setup.alpha * scale


def eta_th(setup) -> float:
    """Coupling strength evaluated at the thermal width Delta_th."""
    bvar = bath_mod.b_variance(setup.bath)
    d_th = delta_th(setup.bath, setup.pointer.v2)
    return math.sqrt(bvar) * d_th**setup.alpha * setup.bath.beta


def _require_coupled(setup, s, s_prime):
    if s_prime**setup.alpha == s**setup.alpha:
        raise DecoherenceFreeError(
            f"pair ({s:g}, {s_prime:g}) is decoherence-free for alpha = {setup.alpha}"
        )


def t_dec_interaction(setup, s, s_prime) -> float:
    """Interaction-regime decoherence time (frozen bath, h ~ h(0)).

    Closed form t^{a+1} = sqrt(2)(a+1)/(eps^a |s'^a - s^a| <B^2>^{1/2}),
    temperature-independent; valid for t_dec << t_B.  The exact D^peak is
    bounded above by (t/t_dec)^{2a+2} at all times.
    """
    _require_coupled(setup, s, s_prime)
    alpha = setup.alpha
    bvar = bath_mod.b_variance(setup.bath)
    gap = abs(_gap_power(setup, s, s_prime))
    val = (
        math.sqrt(2.0) * (alpha + 1) / (setup.epsilon**alpha * gap * math.sqrt(bvar))
    ) ** (1.0 / (alpha + 1))
    if val > 0.5 * setup.bath.t_B:
        warnings.warn(
            "interaction-regime formula used outside its window "
            f"(t_dec = {val:.3g} not << t_B = {setup.bath.t_B:.3g})",
            RegimeWarning,
            stacklevel=2,
        )
    return val


def t_dec_markov(setup, s, s_prime) -> float:
    """Finite-temperature Markov decoherence time.

    Ohmic m = 1:       t^{2a+1} = (2a+1) / (eps^{2a} (s'^a-s^a)^2 M_0),
                       M_0 = int_0^inf Re h dt.
    super-Ohmic m >= 3: t^{2a}  = 2 / (eps^{2a} (s'^a-s^a)^2 |M_1|),
                       M_1 = int_0^inf t Re h dt.
    Valid for t_dec >> T_B = beta.
    """
    if setup.bath.zero_temperature:
        raise ConfigError("zero-temperature bath: use t_dec_zero_t_markov")
    _require_coupled(setup, s, s_prime)
    alpha = setup.alpha
    gap2 = _gap_power(setup, s, s_prime) ** 2
    amp = setup.epsilon ** (2 * alpha) * gap2
    if setup.bath.m == 1:
        m0 = bath_mod.moment_integral(setup.bath, 0)
        val = ((2 * alpha + 1) / (amp * m0)) ** (1.0 / (2 * alpha + 1))
    else:
        m1 = abs(bath_mod.moment_integral(setup.bath, 1))
        val = (2.0 / (amp * m1)) ** (1.0 / (2 * alpha))
    if val < 2.0 * setup.bath.T_B:
        warnings.warn(
            "Markov formula used outside its window "
            f"(t_dec = {val:.3g} not >> T_B = {setup.bath.T_B:.3g})",
            RegimeWarning,
            stacklevel=2,
        )
    return val


def k_alpha(alpha: int) -> float:
    """k_alpha = k_1 - sum_{j=1}^{alpha-1} 1/j with k_1 = euler_gamma/2."""
    return K1 - sum(1.0 / j for j in range(1, alpha))


def t_dec_zero_t_markov(setup, s, s_prime) -> float:
    """Zero-temperature Markov decoherence time.

    super-Ohmic: closed form t_dec = t_ent (sqrt(m-1)/(c_a eta_D))^{1/a}.
    Ohmic: the implicit log relation
        w_D t_ent = (c_a eta_D)^{1/a} w_D t_dec
                    [ln(w_D t_dec) + k_a - 1/(2a)]^{1/(2a)}
    solved by damped fixed-point iteration on u = ln(w_D t_dec).
    """
    if not setup.bath.zero_temperature:
        raise ConfigError("finite-temperature bath: use t_dec_markov")
    _require_coupled(setup, s, s_prime)
    alpha = setup.alpha
    c = c_alpha(s, s_prime, alpha)
    eta_d = eta(setup)
    tent = t_ent(setup, s, s_prime)
    if setup.bath.m >= 3:
        return tent * (math.sqrt(setup.bath.m - 1) / (c * eta_d)) ** (1.0 / alpha)

    w_d = setup.bath.w_D
    ka = k_alpha(alpha)
    shift = ka - 1.0 / (2 * alpha)
    log_a = math.log(w_d * tent) - math.log(c * eta_d) / alpha
    u = max(log_a, -shift + 0.5)
    relax = 0.5
    for _ in range(500):
        ell = u + shift
        if ell <= 0:
            ell = 1e-12
        u_next = log_a - math.log(ell) / (2 * alpha)
        if abs(u_next - u) <= 1e-13 * max(1.0, abs(u_next)):
            return math.exp(u_next) / w_d
        u = u + relax * (u_next - u)
    raise IterationError(
        "zero-T Ohmic decoherence-time iteration did not converge "
        f"(last u = {u:.6g})"
    )


def t_dec_exact(setup, s, s_prime, spec=DEFAULT_QUAD, tol=1e-10) -> float:
    """Exact decoherence time: the root of D^peak(t) = 1.

    D^peak is increasing and convex in t, so the root is unique; it is located
    by geometric bracketing from the interaction-regime estimate followed by
    Brent refinement.
    """
    _require_coupled(setup, s, s_prime)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RegimeWarning)
        hint = t_dec_interaction(setup, s, s_prime)
    return find_root_increasing(
        lambda t: d_peak(setup, s, s_prime, t, spec), 1.0, hint, tol
    )


def measurement_t_dec(setup, spec=DEFAULT_QUAD) -> float:
    """Decoherence time of the measurement: slowest coupled pair.

    Maximum of the exact pairwise times over pairs with coherence above the
    floor; decoherence-free pairs (s'^a = s^a) are excluded, and if every
    coupled pair is decoherence-free an error is raised.
    """
    pairs = _pair_list(setup.object)
    if not pairs:
        raise DegenerateSpectrumError(
            "no coupled eigenvalue pair (rho_S has no off-diagonal coherence)"
        )
    evs = setup.object.eigenvalues
    times = []
    for i, j in pairs:
        s, sp = evs[i], evs[j]
        if sp**setup.alpha == s**setup.alpha:
            continue
        times.append(t_dec_exact(setup, s, sp, spec))
    if not times:
        raise DecoherenceFreeError(
            "every coupled pair is decoherence-free for this alpha"
        )
    best = max(times)
    tent = t_ent_global(setup)
    if best < tent:
        warnings.warn(
            f"decoherence time {best:.3g} is below the entanglement time "
            f"{tent:.3g}; peaks decohere before they separate",
            RegimeWarning,
            stacklevel=2,
        )
    return best


def direct_coupling_t_dec(setup, s, s_prime) -> DirectCouplingResult:
    """Hypothetical direct object-bath dephasing time and its ratio to the
    pointer-mediated Markov time.

    T_dec(s, s') = 1 / (c_a^2 Delta^{2a} M_0); the ratio grows as
    t_ent^{-2a/(2a+1)}, which is why the direct coupling is negligible for a
    fast premeasurement.
    """
    if setup.bath.zero_temperature:
        raise ConfigError("direct-coupling comparison is a finite-T, Ohmic branch")
    if setup.bath.m != 1:
        raise ConfigError("direct-coupling comparison uses the Ohmic (m = 1) branch")
    if s_prime**setup.alpha == s**setup.alpha:
        return DirectCouplingResult(math.inf, math.inf)
    alpha = setup.alpha
    c = c_alpha(s, s_prime, alpha)
    m0 = bath_mod.moment_integral(setup.bath, 0)
    t_direct = 1.0 / (c**2 * setup.pointer.delta ** (2 * alpha) * m0)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RegimeWarning)
        ratio = t_direct / t_dec_markov(setup, s, s_prime)
    return DirectCouplingResult(t_direct, ratio)


# --------------------------------------------------------------------------
# validity diagnostics
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class ValidationReport:
    """Structured validity diagnostics for a measurement setup."""

    variant: str
    uncertainty_ratio: float  # lam / (4 pi delta), must be <= 1
    squeeze_ratio: float
    t_p: float
    thermal_time: float  # beta (inf at zero T)
    eta_value: float
    eta_th_value: Optional[float]
    stability_threshold: float
    stability_ok: bool
    delta_eff: Optional[float]
    w_eff: Optional[float]
    barrier_height: Optional[float]
    t_ent: Optional[float]
    t_dec: Optional[float]
    t_class_value: Optional[float]
    notes: Tuple[str, ...]

    @property
    def ok(self) -> bool:
        return self.stability_ok

    def lines(self):
        out = [f"variant: {self.variant}"]
        out.append(f"uncertainty ratio lam/(4 pi delta) = {self.uncertainty_ratio:.6g}")
        out.append(f"squeeze ratio = {self.squeeze_ratio:.6g}  (1 = unsqueezed)")
        out.append(f"T_P = {self.t_p:.6g}, thermal time = {self.thermal_time:.6g}")
        out.append(f"eta = {self.eta_value:.6g}")
        if self.eta_th_value is not None:
            out.append(
                f"eta_th = {self.eta_th_value:.6g} "
                f"(stability threshold {self.stability_threshold:.6g})"
            )
        out.append(f"stability: {'ok' if self.stability_ok else 'VIOLATED'}")
        if self.delta_eff is not None:
            out.append(f"delta_eff = {self.delta_eff:.6g}")
        if self.w_eff is not None:
            out.append(f"W_eff = {self.w_eff:.6g}")
        if self.barrier_height is not None:
            out.append(f"barrier height = {self.barrier_height:.6g}")
        if self.t_ent is not None:
            out.append(f"t_ent = {self.t_ent:.6g}")
        if self.t_dec is not None:
            out.append(f"t_dec = {self.t_dec:.6g}  (t_dec/T_P = {self.t_dec / self.t_p:.6g})")
        if self.t_class_value is not None:
            out.append(f"t_class = {self.t_class_value:.6g}")
        for note in self.notes:
            out.append(f"note: {note}")
        return out


def validate_setup(setup, solve_t_dec=True, spec=DEFAULT_QUAD) -> ValidationReport:
    """Validity diagnostics: uncertainty/squeezing, stability, time hierarchy.

    For the equilibrium-apparatus variant an unstable effective potential
    (eta_th past its threshold) raises StabilityError; the partial-equilibrium
    variant only collects notes.
    """
    notes = []
    ptr = setup.pointer
    b = setup.bath
    alpha = setup.alpha
    unc = ptr.lam / (4.0 * math.pi * ptr.delta)
    if abs(unc - 1.0) < 1e-9:
        notes.append("pointer is a minimum-uncertainty pure state (lam = 4 pi delta)")
    sq = ptr.squeeze_ratio
    if not (1.0 / 3.0 <= sq <= 3.0):
        notes.append(f"squeezed pointer: ratio {sq:.3g} outside [1/3, 3]")

    eta_val = eta(setup)
    threshold = 1.0 / math.sqrt(2.0) if alpha == 1 else 0.2
    eta_th_val = None
    stability_ok = True
    delta_eff = None
    w_eff_val = None
    barrier = None
    if not b.zero_temperature:
        eta_th_val = eta_th(setup)
        stability_ok = eta_th_val < threshold
        if not stability_ok and setup.variant is Variant.EQUILIBRIUM_APPARATUS:
            raise StabilityError(
                f"equilibrium apparatus unstable: eta_th = {eta_th_val:.6g} "
                f">= {threshold:.6g} for alpha = {alpha}"
            )
        if not stability_ok:
            notes.append(
                f"eta_th = {eta_th_val:.6g} beyond the stability threshold "
                f"{threshold:.6g}; equilibrium apparatus would be unstable"
            )
        g0 = bath_mod.gamma0(b)
        if alpha == 1:
            if 2.0 * g0 < ptr.v2:
                delta_eff = 1.0 / math.sqrt(b.beta * (ptr.v2 - 2.0 * g0))
            else:
                notes.append("effective potential inverted: v2 <= 2 gamma0")
        else:
            from . import dynamics  # deferred: avoids an import cycle

            w_eff_val = dynamics.w_eff(ptr, b, alpha)
            barrier = dynamics.barrier_height(ptr, b, alpha)
    else:
        notes.append("zero-temperature bath: thermal-width diagnostics skipped")

    if b.beta >= 0.5 * ptr.t_p and not b.zero_temperature:
        notes.append(
            f"thermal time {b.beta:.3g} not << T_P = {ptr.t_p:.3g}; "
            "static-apparatus treatment marginal"
        )

    tent_val = None
    tdec_val = None
    tclass_val = None
    try:
        tent_val = t_ent_global(setup)
    except DecometerError as exc:
        notes.append(str(exc))
    if ptr.delta_class is not None and tent_val is not None:
        tclass_val = t_class(setup)
    if solve_t_dec and tent_val is not None:
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", RegimeWarning)
                tdec_val = measurement_t_dec(setup, spec)
            if tdec_val >= 0.1 * setup.t_s:
                notes.append(
                    f"t_dec = {tdec_val:.3g} not << object time scale "
                    f"T_S = {setup.t_s:.3g}"
                )
            if tdec_val >= 0.1 * ptr.t_p:
                notes.append(
                    f"t_dec = {tdec_val:.3g} not << pointer time scale "
                    f"T_P = {ptr.t_p:.3g}"
                )
        except DecometerError as exc:
            notes.append(f"t_dec unavailable: {exc}")

    return ValidationReport(
        variant=setup.variant.value,
        uncertainty_ratio=unc,
        squeeze_ratio=sq,
        t_p=ptr.t_p,
        thermal_time=b.beta,
        eta_value=eta_val,
        eta_th_value=eta_th_val,
        stability_threshold=threshold,
        stability_ok=stability_ok,
        delta_eff=delta_eff,
        w_eff=w_eff_val,
        barrier_height=barrier,
        t_ent=tent_val,
        t_dec=tdec_val,
        t_class_value=tclass_val,
        notes=tuple(notes),
    )
