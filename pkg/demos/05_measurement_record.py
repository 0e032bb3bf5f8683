"""
A spin-1/2 measurement from entanglement to classical record
============================================================

Assemble the full object-pointer state for a two-level object, watch the
coherence blocks die over a few decoherence times, and look at the final
Wigner function: two displaced packets, no interference ridge.
"""
import math
import warnings

import numpy as np

from decometer.bath import SpectralBath, b_variance
from decometer.decoherence import (
    MeasurementSetup,
    ObjectSpec,
    PointerSpec,
    measurement_t_dec,
    t_ent_global,
    validate_setup,
)
from decometer.dynamics import default_x_grid, grid_state, wigner
from decometer.errors import RegimeWarning

warnings.simplefilter("ignore", RegimeWarning)

bath = SpectralBath(3, 1.0, 5.0, 1.0)
bath = SpectralBath(3, 0.01 / b_variance(bath), 5.0, 1.0)  # eta = 0.1
obj = ObjectSpec(eigenvalues=(-0.5, 0.5), rho_s=np.full((2, 2), 0.5))
ptr = PointerSpec(delta=1.0, lam=4.0 * math.pi, mass=1.0, v2=0.25)
setup = MeasurementSetup(epsilon=50.0, alpha=1, object=obj, pointer=ptr, bath=bath)

print("== setup diagnostics ==")
for line in validate_setup(setup).lines():
    print("  " + line)
print()

tdec = measurement_t_dec(setup)
print(f"t_ent = {t_ent_global(setup):.5f},  t_dec = {tdec:.5f}")
print()

print("coherence survival |rho_(up,down)| / sqrt(rho_up rho_down) at the peak:")
for mult in (0.25, 0.5, 1.0, 2.0, 5.0):
    t = mult * tdec
    xs = default_x_grid(setup, t, n=513)
    gs = grid_state(setup, t, xs)
    dens = gs.position_density()
    i_pk = int(np.argmax(np.abs(gs.elements[0, 1])))
    pk = np.unravel_index(i_pk, gs.elements[0, 1].shape)
    coh = abs(gs.elements[0, 1][pk])
    diag = math.sqrt(
        abs(gs.elements[0, 0][pk[0], pk[0]]) * abs(gs.elements[1, 1][pk[1], pk[1]])
    )
    print(f"  t = {mult:4.2f} t_dec:  {coh / diag:10.3e}   (trace err {abs(gs.trace() - 1.0):.1e})")
print()

t_final = 5.0 * tdec
xs = default_x_grid(setup, t_final, n=1025, margin=8.0)
gs = grid_state(setup, t_final, xs)
dens = gs.position_density()

# branch bookkeeping: each eigenvalue s drags its packet to x = eps s t
print(f"== record at t = 5 t_dec = {t_final:.4f} ==")
for side, s in (("left", -0.5), ("right", 0.5)):
    w = np.sign(xs) == np.sign(s)
    mean = np.trapezoid(xs[w] * dens[w], xs[w]) / np.trapezoid(dens[w], xs[w])
    var = np.trapezoid((xs[w] - mean) ** 2 * dens[w], xs[w]) / np.trapezoid(dens[w], xs[w])
    print(f"  {side:5s} branch: mean {mean:+9.4f} (drag eps*s*t = {setup.epsilon * s * t_final:+9.4f}), "
          f"width {math.sqrt(var):.4f} (pointer Delta = {ptr.delta})")

wg = wigner(setup, t_final, xs)
wmax = float(wg.w.max())
mid = np.abs(xs) < 0.25 * setup.epsilon * 0.5 * t_final
print(f"  wigner normalization error: {abs(1.0 - wg.normalization()):.2e}")
print(f"  inter-peak ridge / peak:    {float(wg.w[mid, :].max()) / wmax:.2e}")
print(f"  most negative value / peak: {float(wg.w.min()) / wmax:+.2e}")
print(f"  position marginal vs density, max |diff|: "
      f"{float(np.max(np.abs(wg.position_marginal() - dens))):.2e}")
