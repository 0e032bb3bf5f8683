"""
The pre-thermalized apparatus: widened Gaussian, drift, metastability
=====================================================================

If the pointer equilibrates with its bath before the measurement starts,
the stationary reduced state is not the bare thermal Gaussian: the
coupling renormalizes the confinement.  For linear coupling the state
stays Gaussian with an effective width; for higher powers the potential
develops a metastable well with finite barriers.
"""
import math
import warnings

import numpy as np

from decometer.bath import SpectralBath, gamma0
from decometer.decoherence import (
    MeasurementSetup,
    ObjectSpec,
    PointerSpec,
    Variant,
    delta_th,
    equilibrium_pointer,
    eta_th,
    validate_setup,
)
from decometer.dynamics import (
    barrier_height,
    effective_potential,
    g_t,
    r0_density,
    r_t,
    r_t_numeric,
    w_eff,
)
from decometer.errors import RegimeWarning, StabilityError

warnings.simplefilter("ignore", RegimeWarning)

bath = SpectralBath(m=1, gamma_hat=0.05, w_D=5.0, beta=1.0)
pointer = equilibrium_pointer(bath, mass=1.0, v2=2.0)
obj = ObjectSpec(eigenvalues=(0.0, 1.0), rho_s=np.full((2, 2), 0.5))


def make(alpha):
    return MeasurementSetup(
        epsilon=2.0, alpha=alpha, object=obj, pointer=pointer, bath=bath,
        variant=Variant.EQUILIBRIUM_APPARATUS,
    )


g0 = gamma0(bath)
print(f"gamma0 = {g0:.6f}, thermal width Delta_th = {delta_th(bath, 2.0):.6f}")

# alpha = 1: exact Gaussian with Delta_eff^2 = 1 / (beta (v2 - 2 gamma0))
stp = make(1)
d_eff = 1.0 / math.sqrt(bath.beta * (2.0 - 2.0 * g0))
xs = np.linspace(-0.5 * d_eff, 0.5 * d_eff, 21)
r0 = r0_density(stp, xs, xs)
slope = np.polyfit(xs**2, np.log(r0), 1)[0]
print(f"alpha=1 stationary state: fitted width {1.0 / math.sqrt(-2.0 * slope):.6f}, "
      f"predicted Delta_eff {d_eff:.6f}")
print()

# the closed drift forms against the brute-force xi average
print("closed r_t vs numeric xi-integral:")
for alpha in (1, 2):
    stp = make(alpha)
    for x, xp, s, sp, t in ((0.31, -0.47, 0.0, 1.0, 0.9), (-0.8, 0.3, 1.0, 0.0, 1.6)):
        c = r_t(stp, x, xp, s, sp, t)
        n = r_t_numeric(stp, x, xp, s, sp, t)
        print(f"  alpha={alpha} x={x:+.2f} x'={xp:+.2f} t={t}: "
              f"closed {c:+.6e}  numeric {n:+.6e}  rel {abs(c - n) / abs(n):.1e}")
print()

# drift amplitude is Cauchy-Schwarz-bounded by the decoherence exponent
stp = make(2)
from decometer.decoherence import d_exponent  # noqa: E402  (kept local to the check)
pref = (8.0 * math.pi**2) ** (-2) * pointer.lam**4 * bath.beta * g0
worst = 0.0
rng = np.random.default_rng(7)
for _ in range(50):
    x, xp = rng.normal(scale=1.0, size=2)
    t = float(rng.uniform(0.2, 2.0))
    g = g_t(stp, float(x), float(xp), 0.0, 1.0, t)
    bound = pref * d_exponent(stp, float(x), float(xp), 0.0, 1.0, t).d
    if bound > 0:
        worst = max(worst, g * g / bound)
print(f"sup over 50 draws of g^2 / (lam^4 beta gamma0 D / 64 pi^4): {worst:.4f}  (< 1)")
print()

# metastability picture for alpha >= 2: harmonic confinement vs the
# coupling-induced x^{2 alpha} alongside it
print("effective potential for alpha = 2:")
for x in (0.0, 0.5, 1.0, 1.5, 2.0):
    print(f"  V_eff({x:3.1f}) = {effective_potential(pointer, bath, 2, x):+.5f}")
print(f"well edge-to-edge W_eff = {w_eff(pointer, bath, 2):.4f}, "
      f"barrier height = {barrier_height(pointer, bath, 2):.4f} "
      f"(beta * barrier = {bath.beta * barrier_height(pointer, bath, 2):.2f})")
print(f"eta_th = {eta_th(make(2)):.4f} -- validity requires it below threshold")
print()

# crank the coupling until the well disappears: the variant refuses to build
hot = SpectralBath(m=1, gamma_hat=12.0, w_D=5.0, beta=1.0)
try:
    bad = MeasurementSetup(
        epsilon=2.0, alpha=2, object=obj, pointer=equilibrium_pointer(hot, 1.0, 2.0),
        bath=hot, variant=Variant.EQUILIBRIUM_APPARATUS,
    )
    validate_setup(bad)
    print("unexpectedly stable")
except StabilityError as exc:
    print(f"over-coupled apparatus correctly rejected: {exc}")
