"""Periodic grid functions and discrete forms of the Wirtinger and double-integral inequalities.

A :class:`PeriodicGridFunction` stores ``N`` uniform samples of a ``T``-periodic
map into ``R^n``; sample ``k`` sits at ``t = k T / N`` and index arithmetic
wraps modulo ``N``.  Time integrals use the periodic trapezoid rule (uniform
weights ``T/N``) and the derivative is the periodic forward difference,
which is a second-order approximation of ``u'`` at the staggered points
``(k + 1/2) T / N``.  Spatial norms are ell^p norms, optionally weighted.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field

import numpy as np

from ._errors import DomainError
from .constants import as_exponent, compute_cp

__all__ = [
    "PeriodicGridFunction",
    "WirtingerReport",
    "Lemma2Report",
    "ExtremalResult",
    "tol_report",
    "band_limited",
    "project_mean_zero",
    "rayleigh_quotient",
    "wirtinger_check",
    "extremal_search",
    "lemma2_ratio",
    "shift_difference_check",
    "to_csv",
    "from_csv",
]


@dataclass(frozen=True, eq=False)
class PeriodicGridFunction:
    samples: np.ndarray
    period_T: float = 1.0
    weights: np.ndarray | None = None  # atom masses when the target space is L^p(M, mu)

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=float)
        if s.ndim == 1:
            s = s[:, None]
        if s.ndim != 2:
            raise DomainError(f"samples must be N x n, got shape {s.shape}")
        if s.shape[0] < 8 or s.shape[1] < 1:
            raise DomainError(f"need N >= 8 samples and n >= 1 components, got {s.shape}")
        if not np.all(np.isfinite(s)):
            raise DomainError("samples contain non-finite values")
        if not self.period_T > 0:
            raise DomainError(f"period must be positive, got {self.period_T!r}")
        object.__setattr__(self, "samples", s)
        object.__setattr__(self, "period_T", float(self.period_T))
        if self.weights is not None:
            w = np.asarray(self.weights, dtype=float)
            if w.shape != (s.shape[1],) or np.any(w <= 0):
                raise DomainError("weights must be positive, one per component")
            object.__setattr__(self, "weights", w)

    @property
    def N(self) -> int:
        return self.samples.shape[0]

    @property
    def n(self) -> int:
        return self.samples.shape[1]

    @property
    def dt(self) -> float:
        return self.period_T / self.N

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.N) * self.dt

    def derivative(self) -> np.ndarray:
        return (np.roll(self.samples, -1, axis=0) - self.samples) / self.dt

    def replace(self, samples) -> "PeriodicGridFunction":
        return PeriodicGridFunction(samples, self.period_T, self.weights)


@dataclass(frozen=True)
class WirtingerReport:
    lhs: float
    rhs: float
    slack: float
    holds: bool
    tol_report: float


@dataclass(frozen=True)
class Lemma2Report:
    Q: float
    bound: float
    gap: float
    holds: bool
    numerator: float
    denominator: float


@dataclass
class ExtremalResult:
    u: PeriodicGridFunction
    q: float
    status: str
    iterations: int
    trace: list = field(default_factory=list)


def tol_report(N: int) -> float:
    """Declared discretization tolerance ``10/N^2`` used by every ``holds`` flag."""
    return 10.0 / N**2


def _pth_power_norms(values: np.ndarray, p: float, weights=None) -> np.ndarray:
    """Row-wise ``||v||_p^p``."""
    a = np.abs(values) ** p
    if weights is not None:
        a = a * weights
    return a.sum(axis=-1)


def _norms(values: np.ndarray, p: float, weights=None) -> np.ndarray:
    return _pth_power_norms(values, p, weights) ** (1.0 / p)


def band_limited(N, n=1, K=4, T=1.0, rng=None, decay=1.0, mean_zero=True) -> PeriodicGridFunction:
    """Random trigonometric polynomial of degree ``K`` sampled on ``N`` points.

    Harmonic ``k`` gets Gaussian coefficients with standard deviation
    ``k^-decay``.  ``K`` must stay well below ``N/2``.
    """
    rng = np.random.default_rng(rng)
    if not 1 <= K < N // 4:
        raise DomainError(f"need 1 <= K < N/4, got K={K}, N={N}")
    t = np.arange(N) * (T / N)
    k = np.arange(1, K + 1)
    phase = 2.0 * np.pi * np.outer(t / T, k)
    scale = k ** -float(decay)
    a = rng.standard_normal((K, n)) * scale[:, None]
    b = rng.standard_normal((K, n)) * scale[:, None]
    samples = np.cos(phase) @ a + np.sin(phase) @ b
    if not mean_zero:
        samples = samples + rng.standard_normal(n)
    return PeriodicGridFunction(samples, T)


def project_mean_zero(u: PeriodicGridFunction) -> PeriodicGridFunction:
    return u.replace(u.samples - u.samples.mean(axis=0))


def rayleigh_quotient(u: PeriodicGridFunction, p) -> float:
    """``||u||_{L^p(0,T; l^p)} / ||Du||_{L^p(0,T; l^p)}`` on the grid."""
    p = as_exponent(p).p
    num = _pth_power_norms(u.samples, p, u.weights).sum()
    den = _pth_power_norms(u.derivative(), p, u.weights).sum()
    if den == 0.0:
        raise DomainError("derivative vanishes identically (constant function)")
    if num == 0.0:
        raise DomainError("function vanishes identically")
    return float((num / den) ** (1.0 / p))


def wirtinger_check(u: PeriodicGridFunction, p) -> WirtingerReport:
    """Compare both sides of ``int ||u||^p <= C_p^p T^p int ||u'||^p``.

    ``holds`` allows a relative discretization slack of ``10/N^2`` on the
    right-hand side, so the verdict does not depend on the amplitude of ``u``.
    """
    p = as_exponent(p)
    c = compute_cp(p).c_p
    lhs = _pth_power_norms(u.samples, p.p, u.weights).sum() * u.dt
    rhs = (c * u.period_T) ** p.p * _pth_power_norms(u.derivative(), p.p, u.weights).sum() * u.dt
    tol = tol_report(u.N)
    slack = rhs - lhs
    return WirtingerReport(lhs=float(lhs), rhs=float(rhs), slack=float(slack), holds=bool(slack >= -tol * rhs), tol_report=tol)


def _ascent(u0: np.ndarray, p: float, budget: int, floor: float):
    """Preconditioned projected gradient ascent of ``log q`` over mean-zero scalar grid vectors.

    The gradient is mapped through the inverse of the discrete Laplacian
    ``D^T D`` (diagonal in Fourier space), which removes the ``N^2``
    ill-conditioning of the plain gradient.  Steps start at 0.1 times
    ``||u||`` and are halved until the quotient increases.
    """
    N = u0.size
    k = np.arange(N)
    laplace = (2.0 * np.sin(np.pi * k / N)) ** 2
    laplace[0] = np.inf

    def fwd(v):
        return np.roll(v, -1) - v

    def logq(v):
        return (np.log(np.sum(np.abs(v) ** p)) - np.log(np.sum(np.abs(fwd(v)) ** p))) / p

    u = u0 - u0.mean()
    u /= np.linalg.norm(u)
    f = logq(u)
    trace = [f]
    converged = False
    it = 0
    for it in range(1, budget + 1):
        du = fwd(u)
        A = np.sum(np.abs(u) ** p)
        B = np.sum(np.abs(du) ** p)
        w = np.sign(du) * np.abs(du) ** (p - 1.0) / B
        g = np.sign(u) * np.abs(u) ** (p - 1.0) / A - (np.roll(w, 1) - w)
        d = np.fft.irfft(np.fft.rfft(g) / laplace[: N // 2 + 1], n=N)
        d -= d.mean()
        dn = np.linalg.norm(d)
        if dn == 0.0:
            converged = True
            break
        d /= dn
        step = 0.1
        while step > 1e-14:
            v = u + step * d
            v -= v.mean()
            v /= np.linalg.norm(v)
            fv = logq(v)
            if fv > f:
                break
            step *= 0.5
        else:
            converged = True
            break
        gain = fv - f
        u, f = v, fv
        trace.append(f)
        if gain < floor:
            converged = True
            break
    return u, f, converged, it, trace


def extremal_search(p, N: int = 512, budget: int = 2000, seed: int = 0, T: float = 1.0,
                    restarts: int = 3, floor: float = 1e-14) -> ExtremalResult:
    """Maximize the discrete Rayleigh quotient over mean-zero scalar grid functions.

    Runs ``restarts`` ascents from seeded Gaussian initial data and keeps the
    best.  ``status`` is ``"converged"`` when the per-step gain of ``log q``
    fell below ``floor`` on the winning restart, otherwise
    ``"converged_low_confidence"``.  The returned trace holds ``q`` after each
    accepted step of the winning restart and is nondecreasing.
    """
    p = as_exponent(p)
    if N < 64:
        raise DomainError(f"extremal search needs N >= 64, got {N}")
    if budget < 1:
        raise DomainError("budget must be positive")
    best = None
    for child in np.random.SeedSequence(seed).spawn(restarts):
        u0 = np.random.default_rng(child).standard_normal(N)
        run = _ascent(u0, p.p, budget, floor)
        if best is None or run[1] > best[1]:
            best = run
    u, f, converged, it, trace = best
    # log q above used raw index differences; restore the grid spacing
    scale = T / N
    q = math.exp(f) * scale
    return ExtremalResult(
        u=PeriodicGridFunction(u, T),
        q=q,
        status="converged" if converged else "converged_low_confidence",
        iterations=it,
        trace=[math.exp(v) * scale for v in trace],
    )


def _pair_sum(values: np.ndarray, p: float, weights, block: int = 256) -> float:
    total = 0.0
    for i in range(0, values.shape[0], block):
        diff = values[i:i + block, None, :] - values[None, :, :]
        total += _norms(diff, p, weights).sum()
    return total


def lemma2_ratio(y: PeriodicGridFunction, p) -> Lemma2Report:
    """Ratio of ``iint ||y(t) - y(s)||`` to ``iint ||y'(t) - y'(s)||`` against ``T/6``.

    ``holds`` allows the relative tolerance ``10/N^2`` on the bound.
    """
    p = as_exponent(p).p
    w2 = y.dt**2
    num = _pair_sum(y.samples, p, y.weights) * w2
    den = _pair_sum(y.derivative(), p, y.weights) * w2
    if den == 0.0:
        raise DomainError("derivative differences vanish (constant function)")
    Q = num / den
    bound = y.period_T / 6.0
    return Lemma2Report(Q=float(Q), bound=bound, gap=float(bound - Q),
                        holds=bool(Q <= bound * (1.0 + tol_report(y.N))),
                        numerator=float(num), denominator=float(den))


def shift_difference_check(x: PeriodicGridFunction, h: float, p) -> WirtingerReport:
    """Wirtinger check on ``v(t) = x(t + h) - x(t)`` for a grid-aligned shift ``h``."""
    shift = h / x.dt
    k = int(round(shift))
    if abs(shift - k) > 1e-9 * max(1.0, abs(shift)):
        raise DomainError(f"shift h={h!r} is not a multiple of the grid spacing {x.dt!r}")
    v = np.roll(x.samples, -k, axis=0) - x.samples
    scale = max(1.0, float(np.abs(x.samples).max()))
    means = np.array([math.fsum(col) for col in v.T]) / x.N
    if np.any(np.abs(means) > 1e-14 * scale):
        raise AssertionError(f"shift difference is not mean-zero: {means}")
    return wirtinger_check(x.replace(v), p)


def to_csv(u: PeriodicGridFunction) -> str:
    buf = io.StringIO()
    buf.write(f"# T={u.period_T!r} N={u.N} n={u.n}\n")
    buf.write(",".join(["t"] + [f"x{j}" for j in range(u.n)]) + "\n")
    for t, row in zip(u.times, u.samples):
        buf.write(",".join(repr(float(v)) for v in (t, *row)) + "\n")
    return buf.getvalue()


def from_csv(text: str) -> PeriodicGridFunction:
    lines = text.splitlines()
    if not lines or not lines[0].startswith("#"):
        raise DomainError("grid function CSV must start with a '# T=... N=... n=...' line")
    meta = dict(tok.split("=", 1) for tok in lines[0][1:].split())
    try:
        T, N, n = float(meta["T"]), int(meta["N"]), int(meta["n"])
    except (KeyError, ValueError) as exc:
        raise DomainError(f"malformed metadata line {lines[0]!r}") from exc
    data = np.loadtxt(io.StringIO("\n".join(lines[2:])), delimiter=",", ndmin=2)
    if data.shape != (N, n + 1):
        raise DomainError(f"expected {N} rows of {n + 1} columns, got {data.shape}")
    return PeriodicGridFunction(data[:, 1:], T)
