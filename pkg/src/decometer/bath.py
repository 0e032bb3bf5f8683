r"""Bath models and two-point correlation machinery.

The bath couples to the pointer through a collective agent B with Gaussian
statistics; everything observable enters through the two-point correlator

    h(t) = <B~(t) B~(0)>_eq ,      h-hat(w) = int dt h(t) e^{iwt} ,

with the spectral family

    J(w) = gamma_hat * w^m * exp(-w^2/w_D^2) ,   m positive odd.

Conventions (hbar = k_B = 1):

    Re h-hat(w) = coth(beta w / 2) * J(|w|)        (finite beta)
                = J(|w|)                           (beta = inf, zero T)
    (Im h)-hat(w) = -i g(w),  g(w) = sign(w) J(|w|)   (T-independent)

    Re h(t) = (1/pi) int_0^inf dw Re h-hat(w) cos(wt)
    Im h(t) = -(1/pi) int_0^inf dw J(w) sin(wt)
    gamma(t) = (1/pi) int_0^inf dw (J(w)/w) cos(wt),  gamma0 = gamma(0)

The friction-like integral gamma0 has the closed form
gamma_hat * w_D^m * Gamma(m/2) / (2 pi), and the zero-temperature variance is
2 pi <B^2> = gamma_hat * w_D^{m+1} * ((m-1)/2)!.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import gamma as gamma_fn

from .errors import ConfigError
from .numerics import DEFAULT_QUAD, gaussian_tail_quad

__all__ = [
    "SpectralBath",
    "CorrelatorSample",
    "j_omega",
    "re_h_hat",
    "im_h_hat",
    "h_t",
    "b_variance",
    "gamma_t",
    "gamma0",
    "moment_integral",
    "kms_residual",
]


@dataclass(frozen=True)
class SpectralBath:
    """Gaussian bath defined by J(w) = gamma_hat w^m exp(-w^2/w_D^2).

    beta = math.inf encodes the zero-temperature bath: the only change is
    coth(beta w/2) -> 1, so a single code path with a limit branch suffices.
    """

    m: int
    gamma_hat: float
    w_D: float
    beta: float

    def __post_init__(self):
        if int(self.m) != self.m or self.m < 1 or self.m % 2 == 0:
            raise ConfigError("m must be a positive odd integer")
        if not self.gamma_hat > 0:
            raise ConfigError("gamma_hat must be > 0")
        if not self.w_D > 0:
            raise ConfigError("w_D must be > 0")
        if not self.beta > 0:
            raise ConfigError("beta must be > 0 (math.inf for zero temperature)")

    @property
    def zero_temperature(self):
        return math.isinf(self.beta)

    @property
    def t_B(self):
        """Shortest bath correlation time, the inverse cutoff frequency."""
        return 1.0 / self.w_D

    @property
    def T_B(self):
        """Longest bath correlation time, the thermal time (inf at zero T)."""
        return self.beta


@dataclass(frozen=True)
class CorrelatorSample:
    """One tabulated correlator point; |h(t)| <= h(0) for any valid bath."""

    t: float
    re_h: float
    im_h: float


def _maybe_scalar(value, like):
    if np.isscalar(like) or getattr(like, "ndim", 1) == 0:
        return float(value)
    return value


def j_omega(bath, w):
    """Power spectrum J(w) = gamma_hat w^m exp(-w^2/w_D^2), defined for w >= 0."""
    arr = np.asarray(w, dtype=float)
    if np.any(arr < 0):
        raise ValueError("j_omega is defined for w >= 0")
    val = bath.gamma_hat * arr**bath.m * np.exp(-((arr / bath.w_D) ** 2))
    return _maybe_scalar(val, w)


def re_h_hat(bath, w):
    """Re h-hat(w) = coth(beta w/2) J(|w|), even in w, with analytic w->0 limit.

    The limit is 2 gamma_hat / beta for m = 1 and 0 for m >= 3 (and at zero
    temperature simply J(|w|)).
    """
    arr = np.abs(np.asarray(w, dtype=float))
    env = np.exp(-((arr / bath.w_D) ** 2))
    if bath.zero_temperature:
        return _maybe_scalar(bath.gamma_hat * arr**bath.m * env, w)
    x = 0.5 * bath.beta * arr
    small = x < 1e-6
    xs = np.where(small, 1.0, x)  # placeholder to keep tanh well-defined
    coth = 1.0 / np.tanh(xs)
    direct = bath.gamma_hat * arr**bath.m * env * coth
    # coth(x) ~ 1/x + x/3 for small x: J*coth -> gamma_hat (2 w^{m-1}/beta
    #                                       + beta w^{m+1}/6) * envelope
    series = bath.gamma_hat * env * (
        2.0 * arr ** (bath.m - 1) / bath.beta
        + bath.beta * arr ** (bath.m + 1) / 6.0
    )
    return _maybe_scalar(np.where(small, series, direct), w)


def im_h_hat(bath, w):
    """The real odd function g(w) with (Im h)-hat(w) = -i g(w); g = J for w >= 0."""
    arr = np.asarray(w, dtype=float)
    val = np.sign(arr) * bath.gamma_hat * np.abs(arr) ** bath.m * np.exp(
        -((arr / bath.w_D) ** 2)
    )
    return _maybe_scalar(val, w)


def _osc_decay_scale(bath, t, spec):
    """Decay scale such that the quadrature cutoff is w_D sqrt(ln 1/abs_tol) + 40/|t|."""
    root_log = math.sqrt(math.log(1.0 / max(spec.abs_tol, 1e-300)))
    if t == 0.0:
        return bath.w_D
    return bath.w_D + 40.0 / (abs(t) * root_log)


def h_t(bath, t, spec=DEFAULT_QUAD):
    """Correlator h(t) reconstructed from its Fourier transform.

    Re h(t) = int_0^inf (dw/pi) Re h-hat(w) cos(wt),
    Im h(t) = -int_0^inf (dw/pi) J(w) sin(wt).
    """
    decay = _osc_decay_scale(bath, t, spec)
    re = gaussian_tail_quad(
        lambda w: re_h_hat(bath, w) * np.cos(w * t), decay, spec
    ) / math.pi
    im = -gaussian_tail_quad(
        lambda w: j_omega(bath, w) * np.sin(w * t), decay, spec
    ) / math.pi
    return complex(re, im)


@lru_cache(maxsize=512)
def _b_variance_cached(bath, spec):
    if bath.zero_temperature:
        half = (bath.m - 1) // 2
        return bath.gamma_hat * bath.w_D ** (bath.m + 1) * math.factorial(half) / (
            2.0 * math.pi
        )
    return gaussian_tail_quad(
        lambda w: re_h_hat(bath, w), bath.w_D, spec
    ) / math.pi


def b_variance(bath, spec=DEFAULT_QUAD):
    """<B^2> = h(0).  Closed form at zero temperature, quadrature otherwise."""
    return _b_variance_cached(bath, spec)


def gamma_t(bath, t, spec=DEFAULT_QUAD):
    """gamma(t) = int_0^inf (dw/pi) (J(w)/w) cos(wt); even in t."""
    decay = _osc_decay_scale(bath, t, spec)
    return gaussian_tail_quad(
        lambda w: bath.gamma_hat
        * w ** (bath.m - 1)
        * np.exp(-((w / bath.w_D) ** 2))
        * np.cos(w * t),
        decay,
        spec,
    ) / math.pi


def gamma0(bath):
    """gamma(0) = gamma_hat w_D^m Gamma(m/2) / (2 pi), the friction integral."""
    return bath.gamma_hat * bath.w_D**bath.m * float(gamma_fn(bath.m / 2.0)) / (
        2.0 * math.pi
    )


def moment_integral(bath, a, spec=DEFAULT_QUAD):
    """Time moment int_0^inf t^a Re h(t) dt via frequency-domain integrals.

    Convergent for a <= m-2; additionally (a, m) = (0, 1) gives
    Re h-hat(0)/2, and (a, m) = (1, 1) at finite temperature uses the
    subtracted (finite-part) integrand (Re h-hat(w) - Re h-hat(0))/w^2,
    which equals the convergent time-domain integral exactly.  Even a < m-2
    vanish by parity of the frequency kernel.
    """
    if int(a) != a or a < 0:
        raise ValueError("a must be a nonnegative integer")
    a = int(a)
    m = bath.m

    if m == 1 and a == 0:
        return 0.5 * re_h_hat(bath, 0.0)
    if m == 1 and a == 1:
        if bath.zero_temperature:
            raise ValueError(
                "int t Re h dt diverges logarithmically for the zero-T Ohmic bath"
            )
        # Finite part of -(1/pi) int (Re h-hat(w) - Re h-hat(0))/w^2 dw.  The
        # plain subtraction leaves a -Re h-hat(0)/w^2 power-law tail, so
        # subtract Re h-hat(0) e^{-w^2/w_D^2} instead (same finite part after
        # the closed correction int (1 - e^{-w^2/w_D^2})/w^2 dw = sqrt(pi)/w_D)
        # leaving a genuinely Gaussian-tailed integrand
        #   e^{-w^2/w_D^2} (gamma_hat w coth(beta w/2) - Re h-hat(0)) / w^2 .
        rh0 = 2.0 * bath.gamma_hat / bath.beta
        gh, beta = bath.gamma_hat, bath.beta

        def integrand(w):
            x = 0.5 * beta * w
            env = np.exp(-((w / bath.w_D) ** 2))
            small = x < 1e-3
            xs = np.where(small, 1.0, x)
            direct = (gh * w / np.tanh(xs) - rh0) / np.where(small, 1.0, w**2)
            series = gh * beta / 6.0 - gh * beta**3 * w**2 / 360.0
            return env * np.where(small, series, direct)

        quad = gaussian_tail_quad(integrand, bath.w_D, spec)
        return (rh0 * math.sqrt(math.pi) / bath.w_D - quad) / math.pi
    if a > m - 2:
        raise ValueError(f"moment a={a} diverges for m={m}")
    if a % 2 == 0:
        return 0.0
    sign = (-1.0) ** ((a + 1) // 2)
    return sign * math.factorial(a) * gaussian_tail_quad(
        lambda w: re_h_hat(bath, w) / w ** (a + 1), bath.w_D, spec
    ) / math.pi


def kms_residual(bath, w):
    """Re h-hat(w) tanh(beta w/2) - g(w); analytically zero for this family."""
    if bath.zero_temperature:
        raise ConfigError("KMS residual is undefined at zero temperature")
    if w == 0.0:
        raise ValueError("kms_residual requires w != 0")
    return re_h_hat(bath, w) * math.tanh(0.5 * bath.beta * w) - im_h_hat(bath, w)
