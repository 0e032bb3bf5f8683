"""
Bath correlators, detailed balance, and a finite bath that agrees
=================================================================

The continuum bath enters every kernel through h(t) and its transform.
This script exercises the identities the library trades on -- KMS detailed
balance, the friction integral, the moment sums -- and then rebuilds h(t)
from an explicit 800-mode discretization to show the continuum forms are
the honest limit of a concrete oscillator bath.
"""
import math

import numpy as np

from decometer import wick_oracle as wo
from decometer.bath import (
    SpectralBath,
    b_variance,
    gamma0,
    gamma_t,
    h_t,
    im_h_hat,
    j_omega,
    kms_residual,
    moment_integral,
    re_h_hat,
)

bath = SpectralBath(m=3, gamma_hat=0.4, w_D=2.5, beta=1.2)
print(f"bath: m={bath.m}, gamma_hat={bath.gamma_hat}, w_D={bath.w_D}, beta={bath.beta}")
print(f"<B^2> = {b_variance(bath):.6f}")
print(f"gamma0 = {gamma0(bath):.6f}   (static friction)")
print()

# detailed balance: Re h-hat * tanh(beta w / 2) = Im-part spectrum, exactly.
ws = np.array([0.2, 0.9, 2.0, 4.1])
print("KMS residual (closed-form zero; float noise only):")
for w in ws:
    print(f"  w = {w:4.1f}:  {kms_residual(bath, float(w)):+.3e}")
print()

# h(t) decays on the bath answer time 1/w_D; the imaginary part is the
# zero-point piece and survives beta -> inf.
print(f"{'t':>6} {'Re h':>12} {'Im h':>12} {'gamma(t)':>12}")
for t in (0.0, 0.2, 0.5, 1.0, 2.0, 4.0):
    h = h_t(bath, t)
    print(f"{t:6.2f} {h.real:12.6f} {h.imag:12.6f} {gamma_t(bath, t):12.6f}")
print()

# moment sums: M_0 feeds the Markov kernels, M_1 the first correction.
for a in (0, 1, 2):
    print(f"M_{a} = int t^{a} Re h dt = {moment_integral(bath, a):+.6f}")
print()

# --- now the finite bath --------------------------------------------------
# Midpoint-discretize J(w) into N modes: |kappa_nu|^2 / N = J(w_nu) dw / pi.
# The Wick-oracle mode sums (which never touch the Fock truncation) then
# reproduce h(t) and gamma(t) to the discretization error.
N = 800
wmax = 4.0 * bath.w_D
dw = wmax / N
wgrid = (np.arange(N) + 0.5) * dw
kappas = np.sqrt(N * j_omega(bath, wgrid) * dw / math.pi)
fb = wo.FiniteBosonBath(
    freqs=tuple(wgrid), couplings=tuple(kappas), beta=bath.beta, fock_cutoff=2
)

print(f"{N}-mode discretization vs continuum:")
print(f"{'t':>6} {'|h_modes - h|':>14} {'|g_modes - g|':>14}")
for t in (0.1, 0.5, 1.0, 2.0, 5.0):
    dh = abs(wo.exact_h(fb, t) - h_t(bath, t))
    dg = abs(wo.gamma_modes(fb, t) - gamma_t(bath, t))
    print(f"{t:6.2f} {dh:14.3e} {dg:14.3e}")
print(f"gamma0: modes {wo.gamma0_modes(fb):.8f}  continuum {gamma0(bath):.8f}")
print()

# Detailed balance for the finite bath via analytic continuation:
# h(-t - i beta) = h(t), checked at a couple of times.
for t in (0.3, 1.1):
    lhs = wo.exact_h(fb, complex(-t, -fb.beta))
    rhs = wo.exact_h(fb, t)
    print(f"continuation check t={t}: |h(-t-i beta) - h(t)| = {abs(lhs - rhs):.3e}")
print()

# Sanity on the transform pair at one frequency: reconstruct Re h-hat by a
# cosine transform of Re h(t) on a dense grid.
w0 = 1.7
ts = np.linspace(0.0, 12.0 / bath.w_D, 3001)
re_h = np.array([h_t(bath, float(t)).real for t in ts])
recon = 2.0 * np.trapezoid(re_h * np.cos(w0 * ts), ts)
print(f"cosine-transform check at w = {w0}: {recon:.6f} vs "
      f"{re_h_hat(bath, np.array([w0]))[0]:.6f}")
print(f"(odd part, for reference: Im-spectrum g({w0}) = "
      f"{im_h_hat(bath, np.array([w0]))[0]:.6f})")
