"""Hunt for closed curves with small T L along the curve."""
import math

from periodbounds.optimizer import FourierCurve, objective, search

print("unit circle:", objective(FourierCurve.circle(), 2.0) / (2 * math.pi), "x 2 pi")
print("ellipse 2:1:", objective(FourierCurve.from_harmonics([0, 0], [[2], [0]], [[0], [1]]), 2.0) / (2 * math.pi), "x 2 pi")

# A short run; the acceptance suite uses budget 20000
res = search(p=3.0, n=2, K=3, budget=3000, seed=0)
print(f"best T L = {res.best_TL:.6f}, floor = {res.lower_bound:.6f} ({res.floor}), gap = {res.certificate_gap:.2e}")
