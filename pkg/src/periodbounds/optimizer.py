"""Search for closed curves with small ``T * L`` along the curve.

A curve ``y : [0, 2 pi) -> R^n`` is a trigonometric polynomial.  Its
*restricted* Lipschitz constant is

    sup_{s != t} ||y'(t) - y'(s)||_p / ||y(t) - y(s)||_p,

the smallest ``L`` for which the field ``f(y(t)) = y'(t)`` defined on the
curve alone is ``L``-Lipschitz.  Every lower-bound argument for ``T L`` only
uses such pairs of orbit points, so ``2 pi * L`` over curves bounds the
restricted problem from above.  Nothing here claims the field extends to the
whole space with the same constant.
"""

from __future__ import annotations

import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from ._errors import ConvergenceError, DomainError
from .constants import BANACH_BOUND, HILBERT_BOUND, compute_cp

__all__ = [
    "FourierCurve",
    "SearchResult",
    "restricted_lipschitz",
    "objective",
    "normalize_curve",
    "lower_bound_for",
    "search",
    "DEFAULT_GRID",
    "SEARCH_GRID",
    "FINAL_GRID",
]

DEFAULT_GRID = 512
SEARCH_GRID = 128
FINAL_GRID = 2048
TWO_PI = 2.0 * math.pi


@dataclass(frozen=True, eq=False)
class FourierCurve:
    """Closed curve of period ``2 pi`` given by its Fourier coefficients.

    ``coeffs`` has shape ``(n, 2K + 1)``; row ``j`` holds the constant term,
    then the cosine coefficients of harmonics ``1..K``, then the sine ones.
    """

    coeffs: np.ndarray

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=float)
        if c.ndim != 2 or c.shape[1] < 3 or c.shape[1] % 2 == 0:
            raise DomainError(f"coeffs must have shape (n, 2K+1) with K >= 1, got {c.shape}")
        if not np.all(np.isfinite(c)):
            raise DomainError("coeffs must be finite")
        if not np.any(c[:, 1:]):
            raise DomainError("curve is constant")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @property
    def n(self) -> int:
        return self.coeffs.shape[0]

    @property
    def K(self) -> int:
        return (self.coeffs.shape[1] - 1) // 2

    @classmethod
    def from_harmonics(cls, const, cos, sin) -> "FourierCurve":
        cos = np.atleast_2d(np.asarray(cos, dtype=float))
        sin = np.atleast_2d(np.asarray(sin, dtype=float))
        const = np.asarray(const, dtype=float).reshape(-1, 1)
        return cls(np.hstack([const, cos, sin]))

    @classmethod
    def circle(cls, radius=1.0, center=(0.0, 0.0), K=1) -> "FourierCurve":
        c = np.zeros((2, 2 * K + 1))
        c[:, 0] = center
        c[0, 1] = radius
        c[1, K + 1] = radius
        return cls(c)

    def evaluate(self, t):
        """Return ``(y, y', y'')`` at the times ``t``, each of shape ``(len(t), n)``."""
        t = np.atleast_1d(np.asarray(t, dtype=float))
        K = self.K
        k = np.arange(1, K + 1)
        kt = np.outer(t, k)
        c, s = np.cos(kt), np.sin(kt)
        a = self.coeffs[:, 1:K + 1].T
        b = self.coeffs[:, K + 1:].T
        y = self.coeffs[:, 0] + c @ a + s @ b
        dy = (-s * k) @ a + (c * k) @ b
        ddy = -(c * k**2) @ a - (s * k**2) @ b
        return y, dy, ddy

    def sample(self, N: int):
        return self.evaluate(TWO_PI * np.arange(N) / N)

    def shifted(self, s: float) -> "FourierCurve":
        """The curve ``t -> y(t + s)``."""
        K = self.K
        ks = np.arange(1, K + 1) * s
        c, si = np.cos(ks), np.sin(ks)
        a = self.coeffs[:, 1:K + 1]
        b = self.coeffs[:, K + 1:]
        return FourierCurve(np.hstack([self.coeffs[:, :1], a * c + b * si, b * c - a * si]))

    def scaled(self, factor: float) -> "FourierCurve":
        return FourierCurve(self.coeffs * factor)


def _norm(v, p):
    v = np.abs(v)
    if math.isinf(p):
        return v.max(axis=-1)
    return (v**p).sum(axis=-1) ** (1.0 / p)


def _check_p(p) -> float:
    p = float(p)
    if not p >= 1.0:
        raise DomainError(f"exponent must satisfy p >= 1, got {p!r}")
    return p


@lru_cache(maxsize=8)
def _far_pairs(N: int):
    """Index pairs ``i < j`` at cyclic distance at least 2."""
    i, j = np.triu_indices(N, k=2)
    keep = (j - i) < N - 1
    return i[keep], j[keep]


def restricted_lipschitz(curve: FourierCurve, p=2.0, grid_N: int = DEFAULT_GRID) -> float:
    """Largest ``||y'(t_i) - y'(t_j)|| / ||y(t_i) - y(t_j)||`` over all grid pairs.

    Pairs at cyclic index distance ``<= 1`` use the diagonal limit
    ``||y''(t_i)|| / ||y'(t_i)||`` instead of the raw ratio.  Returns ``inf``
    when the curve passes twice through a point with different velocities or
    stops.
    """
    p = _check_p(p)
    if grid_N < 128:
        raise DomainError(f"grid_N must be >= 128, got {grid_N}")
    y, dy, ddy = curve.sample(grid_N)

    speed = _norm(dy, p)
    accel = _norm(ddy, p)
    if np.any(speed < 1e-12):
        return math.inf
    best = float(np.max(accel / speed))

    I, J = _far_pairs(grid_N)
    block = 1 << 20
    for lo in range(0, I.size, block):
        i, j = I[lo:lo + block], J[lo:lo + block]
        den = _norm(y[i] - y[j], p)
        num = _norm(dy[i] - dy[j], p)
        if np.any((den < 1e-12) & (num >= 1e-12)):
            return math.inf
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(den >= 1e-12, num / den, 0.0)
        best = max(best, float(ratio.max()))
    return best


def objective(curve: FourierCurve, p=2.0, grid_N: int = DEFAULT_GRID) -> float:
    """``T * L`` with ``T = 2 pi`` and ``L`` the restricted Lipschitz constant.

    Invariant under scaling and translation of the curve and under time
    shifts by multiples of ``2 pi / grid_N``.  Changing the speed of
    traversal rescales ``L`` inversely to the implied period, so pinning
    ``T = 2 pi`` loses nothing.
    """
    return TWO_PI * restricted_lipschitz(curve, p, grid_N)


def normalize_curve(curve: FourierCurve, p=2.0, grid_N: int = DEFAULT_GRID) -> FourierCurve:
    """Center, shift time so the farthest grid point sits at ``t = 0``, scale it to norm 1.

    The shift is a multiple of ``2 pi / grid_N`` so the objective on that grid
    is unchanged.  Ties within ``1e-12`` resolve to the earliest grid point.
    """
    p = _check_p(p)
    c = curve.coeffs.copy()
    c[:, 0] = 0.0
    centered = FourierCurve(c)
    r = _norm(centered.sample(grid_N)[0], p)
    top = r.max()
    m = int(np.flatnonzero(r >= top * (1.0 - 1e-12))[0])
    if m:
        centered = centered.shifted(TWO_PI * m / grid_N)
    return centered.scaled(1.0 / top)


def lower_bound_for(p: float) -> tuple[float, str]:
    """Best proven floor for ``T L`` at exponent ``p`` and a label saying where it comes from."""
    p = _check_p(p)
    if p == 2.0:
        return HILBERT_BOUND, "hilbert"
    if 1.0 < p < math.inf:
        return max(BANACH_BOUND, compute_cp(p).c_p_inverse), "wirtinger"
    return BANACH_BOUND, "floor = 6 only"


@dataclass
class SearchResult:
    p: float
    n: int
    K: int
    budget: int
    seed: int
    best_curve: FourierCurve
    best_TL: float
    search_TL: float
    lower_bound: float
    floor: str
    certificate_gap: float
    trace: list = field(default_factory=list)

    def to_json(self) -> str:
        doc = {
            "p": self.p,
            "n": self.n,
            "K": self.K,
            "budget": self.budget,
            "seed": self.seed,
            "best_TL": self.best_TL,
            "search_TL": self.search_TL,
            "lower_bound": self.lower_bound,
            "floor": self.floor,
            "certificate_gap": self.certificate_gap,
            "coeffs": self.best_curve.coeffs.tolist(),
            "grids": {"search": SEARCH_GRID, "final": FINAL_GRID},
            "restricted": True,
        }
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"

    def trace_csv(self) -> str:
        buf = io.StringIO()
        buf.write("iteration,best_so_far\n")
        for it, best in self.trace:
            buf.write(f"{it},{best!r}\n")
        return buf.getvalue()


def search(p=2.0, n: int = 2, K: int = 3, budget: int = 20_000, seed: int = 0,
           population: int = 5, offspring: int = 20, sigma0: float = 0.3,
           sigma_end: float = 1e-4, workers: int = 1) -> SearchResult:
    """Elitist (mu + lambda) evolution strategy over Fourier coefficients.

    Candidates are kept centered and unit-norm in coefficient space (the
    objective ignores translation and scale).  The mutation step decays
    geometrically from ``sigma0`` to ``sigma_end`` over the generations.
    Evaluation uses a ``SEARCH_GRID``-point pair grid; the winner is
    re-evaluated on ``FINAL_GRID`` points and that value is reported as
    ``best_TL``.  All random draws happen on one generator in a fixed order,
    so the result depends on ``seed`` only, never on ``workers``.
    """
    p = _check_p(p)
    if n < 2 or K < 1:
        raise DomainError(f"need n >= 2 and K >= 1, got n={n}, K={K}")
    if budget < 1000:
        raise DomainError(f"budget must be >= 1000 evaluations, got {budget}")
    rng = np.random.default_rng(seed)
    dim = n * 2 * K
    harmonic = np.tile(np.r_[np.arange(1, K + 1), np.arange(1, K + 1)], n).astype(float)

    def to_curve(x):
        c = np.zeros((n, 2 * K + 1))
        c[:, 1:] = x.reshape(n, 2 * K)
        return FourierCurve(c)

    def fitness(x):
        return objective(to_curve(x), p, SEARCH_GRID)

    def evaluate(xs):
        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                return list(pool.map(fitness, xs))
        return [fitness(x) for x in xs]

    def unit(x):
        return x / np.linalg.norm(x)

    parents = [unit(rng.standard_normal(dim) / harmonic) for _ in range(population)]
    scores = evaluate(parents)
    used = population
    generations = max((budget - used) // offspring, 1)
    trace = [(0, min(scores))]
    for g in range(generations):
        sigma = sigma0 * (sigma_end / sigma0) ** (g / max(generations - 1, 1))
        picks = rng.integers(population, size=offspring)
        noise = rng.standard_normal((offspring, dim))
        kids = [unit(parents[i] + sigma * z) for i, z in zip(picks, noise)]
        kid_scores = evaluate(kids)
        used += offspring
        pool = parents + kids
        pool_scores = scores + kid_scores
        order = np.argsort(pool_scores, kind="stable")[:population]
        parents = [pool[i] for i in order]
        scores = [pool_scores[i] for i in order]
        trace.append((g + 1, scores[0]))

    if not math.isfinite(scores[0]):
        raise ConvergenceError(f"all {used} candidates were degenerate (self-intersecting or stalled)")
    best = normalize_curve(to_curve(parents[0]), p, SEARCH_GRID)
    best_TL = objective(best, p, FINAL_GRID)
    floor_value, floor = lower_bound_for(p)
    return SearchResult(
        p=p, n=n, K=K, budget=budget, seed=seed,
        best_curve=best,
        best_TL=best_TL,
        search_TL=scores[0],
        lower_bound=floor_value,
        floor=floor,
        certificate_gap=best_TL - floor_value,
        trace=trace,
    )
