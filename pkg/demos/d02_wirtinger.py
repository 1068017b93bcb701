"""Discrete extremals of ||u|| / ||u'|| for mean-zero periodic samples."""
import numpy as np

from periodbounds.constants import compute_cp
from periodbounds.pfunc import band_limited, extremal_search, wirtinger_check

# Random trigonometric polynomials always sit below the sharp constant
u = band_limited(512, n=2, K=6, T=3.0, rng=1)
rep = wirtinger_check(u, 3.0)
print("random function:", "holds" if rep.holds else "FAILS", f"slack={rep.slack:.3e}")

# Gradient ascent on the quotient finds the extremal
for p in (1.5, 2.0, 3.0):
    res = extremal_search(p, N=512, seed=0)
    print(f"p={p}: q*={res.q:.8f}  C_p={compute_cp(p).c_p:.8f}  status={res.status}")

# At p = 2 the maximiser is a single shifted sinusoid
res = extremal_search(2.0, N=256, seed=3)
spectrum = np.abs(np.fft.rfft(res.u.samples[:, 0]))
print("energy in first harmonic:", spectrum[1] ** 2 / np.sum(spectrum**2))
