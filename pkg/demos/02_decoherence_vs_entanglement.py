"""
Decoherence time against entanglement time, branch by branch
============================================================

Sweep the object-pointer coupling eps at fixed bath coupling eta = 0.1 and
tabulate the exact t_dec next to its two closed-form limits.  Fast
measurements (small t_ent) decohere while the bath is still frozen and all
spectral exponents m collapse onto one curve; slow measurements are
Markovian and the branches split, higher m decohering later.
"""
import math
import warnings

import numpy as np

from decometer.bath import SpectralBath, b_variance
from decometer.decoherence import (
    MeasurementSetup,
    ObjectSpec,
    PointerSpec,
    t_dec_exact,
    t_dec_interaction,
    t_dec_markov,
)
from decometer.errors import RegimeWarning

ETA = 0.1
W_D = 5.0
OBJ = ObjectSpec(eigenvalues=(0.0, 1.0), rho_s=np.full((2, 2), 0.5))
PTR = PointerSpec(delta=1.0, lam=4.0 * math.pi, mass=1.0, v2=0.25)

# the asymptotes warn when evaluated outside their own regime; here that is
# the point of the exercise
warnings.simplefilter("ignore", RegimeWarning)

taus = np.geomspace(1e-4, 30.0, 12)
for alpha in (1, 2):
    print(f"--- coupling power alpha = {alpha} ---")
    header = f"{'tau_ent':>9}"
    for m in (1, 3, 5):
        header += f" | {'m=%d exact' % m:>10} {'int':>8} {'markov':>8}"
    print(header)
    rows = {}
    for m in (1, 3, 5):
        gh = ETA**2 / b_variance(SpectralBath(m, 1.0, W_D, 1.0))
        for tau in taus:
            stp = MeasurementSetup(
                epsilon=1.0 / tau, alpha=alpha, object=OBJ, pointer=PTR,
                bath=SpectralBath(m, gh, W_D, 1.0),
            )
            rows[m, tau] = (
                t_dec_exact(stp, 0.0, 1.0),
                t_dec_interaction(stp, 0.0, 1.0),
                t_dec_markov(stp, 0.0, 1.0),
            )
    for tau in taus:
        line = f"{tau:9.1e}"
        for m in (1, 3, 5):
            ex, ti, tm = rows[m, tau]
            line += f" | {ex:10.4g} {ti:8.3g} {tm:8.3g}"
        print(line)
    e1 = rows[1, taus[-1]][0]
    e3 = rows[3, taus[-1]][0]
    e5 = rows[5, taus[-1]][0]
    print(f"branch split at the slow end: t_dec(m=3)/t_dec(m=1) = {e3 / e1:.2f}, "
          f"t_dec(m=5)/t_dec(m=3) = {e5 / e3:.2f}")
    short = rows[1, taus[0]][0], rows[3, taus[0]][0], rows[5, taus[0]][0]
    print(f"collapse at the fast end: spread {max(short) / min(short) - 1.0:.2e}\n")

print("slopes of log t_dec vs log t_ent (alpha=1, m=1):")
gh = ETA**2 / b_variance(SpectralBath(1, 1.0, W_D, 1.0))
for lo, hi, label, want in ((1e-4, 1e-2, "interaction", 0.5),
                            (3.0, 30.0, "Ohmic Markov", 2.0 / 3.0)):
    tt = np.geomspace(lo, hi, 5)
    ex = [
        t_dec_exact(
            MeasurementSetup(epsilon=1.0 / t, alpha=1, object=OBJ, pointer=PTR,
                             bath=SpectralBath(1, gh, W_D, 1.0)),
            0.0, 1.0,
        )
        for t in tt
    ]
    slope = np.polyfit(np.log(tt), np.log(ex), 1)[0]
    print(f"  {label:13s}: {slope:.4f}  (expect {want:.4f})")
