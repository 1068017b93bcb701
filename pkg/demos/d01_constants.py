"""The sharp Wirtinger constant C_p and where 1/C_p beats 6."""
import numpy as np

from periodbounds.constants import compute_cp, cp_quadrature, figure_data, remark2_bound, supercritical_range

# Closed form first, then the quadrature cross-check at the same p
for p in (1.5, 2.0, 3.0, 10.0):
    wc = compute_cp(p)
    quad = cp_quadrature(p, 1e-10)
    print(f"p={p:5.2f}  1/C_p={wc.c_p_inverse:.12f}  |closed - quad|={abs(wc.c_p - quad.c_p):.1e}")

# 1/C_p is 2 pi at p = 2 and falls back to 4 at both ends
print("p -> 1:", compute_cp(1.000001).c_p_inverse, " p -> inf:", compute_cp(1e6).c_p_inverse)

# The band of exponents where the sharp constant improves on 6
r = supercritical_range(6.0)
print(f"1/C_p > 6 exactly for {r.p_low:.10f} < p < {r.p_high:.10f}")

# A coarse text version of the curve
table = figure_data(1.05, 4.0, 0.25)
for p, v in table:
    bar = "#" * int(round((v - 4) * 20))
    print(f"{p:5.2f} {v:7.4f} {bar}")

# Perturbed Hilbert norms: the bound shrinks as the norm moves away
print([round(remark2_bound(e), 6) for e in np.linspace(0, 0.5, 6)])
