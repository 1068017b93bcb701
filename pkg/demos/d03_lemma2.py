"""The double-integral ratio Q for closed curves is at most T/6."""
import numpy as np

from periodbounds.pfunc import PeriodicGridFunction, band_limited, lemma2_ratio

t = np.linspace(0, 2 * np.pi, 512, endpoint=False)
circle = PeriodicGridFunction(np.column_stack([np.cos(t), np.sin(t)]), 2 * np.pi)
rep = lemma2_ratio(circle, 2.0)
print(f"circle: Q={rep.Q:.6f}, T/6={rep.bound:.6f}, both integrals ~ {rep.numerator:.4f} (16 pi = {16 * np.pi:.4f})")

# Random curves in R^3 leave a visible gap
rng = np.random.default_rng(0)
gaps = [lemma2_ratio(band_limited(128, 3, K=4, T=2.0, rng=rng, mean_zero=False), 3.0).gap for _ in range(20)]
print("smallest relative gap over 20 curves:", min(gaps) / (2.0 / 6))
