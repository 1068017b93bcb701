"""Certify periodic orbits of Lipschitz fields against the known floors for T L."""
import json

from periodbounds.orbits import builtin_field, certify_orbit

# A rotation is the Hilbert-space extremal: T L = 2 pi exactly
cert = certify_orbit(builtin_field("planar_rotation", {"L": 3.0}, 2.0), [1.0, 0.0])
print(f"rotation: T={cert.period_T:.8f} L={cert.lipschitz_hat:.8f} TL={cert.TL:.8f}")

# The averaging field on two atoms has the explicit solution (-cos t, sin t) in every L^p
for p in (1.5, 2.0, 3.0):
    field = builtin_field("remark1_averaging", {"weights": [1, 1], "A": [0], "B": [1]}, p)
    cert = certify_orbit(field, [-1.0, 0.0], n_pairs=4000)
    print(p, [(b["name"], round(b["value"], 6), b["satisfied"]) for b in cert.bounds])

# Unequal masses: nothing is assumed, L is measured
field = builtin_field("remark1_averaging", {"weights": [1, 2, 0.5, 1.5], "A": [0, 1], "B": [2, 3]}, 3.0)
print(json.dumps(json.loads(certify_orbit(field, [-1, -1, 0, 0]).to_json())["bounds"], indent=1))
