"""Sharp constants of the periodic L^p Wirtinger inequality.

For a mean-zero 1-periodic function ``u`` and ``1 < p < inf``::

    ||u||_p <= C_p ||u'||_p,
    C_p = p / (4 (p-1)^(1/p) B(1 - 1/p, 1/p)).

With ``B(1 - 1/p, 1/p) = pi / sin(pi/p)`` this becomes
``C_p = p sin(pi/p) / (4 pi (p-1)^(1/p))``.  The reciprocal ``1/C_p`` is a
lower bound for ``T L`` on ell^p and L^p spaces; it equals ``2 pi`` at
``p = 2`` and tends to 4 at both ends of the exponent range.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from ._errors import ConvergenceError, DomainError

__all__ = [
    "PExponent",
    "WirtingerConstant",
    "SupercriticalRange",
    "as_exponent",
    "compute_cp",
    "cp_inverse",
    "cp_quadrature",
    "supercritical_range",
    "conjugate_symmetry_check",
    "remark2_bound",
    "figure_data",
    "figure_csv",
]

BANACH_BOUND = 6.0
HILBERT_BOUND = 2.0 * math.pi
# Below this distance from p = 1 the closed form loses all significant digits.
_DEGENERATE_GAP = 1e-9


@dataclass(frozen=True)
class PExponent:
    """A Lebesgue exponent ``1 < p < inf`` together with its Hoelder conjugate."""

    p: float
    conjugate: float = field(init=False)

    def __post_init__(self):
        p = float(self.p)
        if not math.isfinite(p) or p <= 1.0:
            raise DomainError(f"exponent must satisfy 1 < p < inf, got {self.p!r}")
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "conjugate", p / (p - 1.0))

    def __float__(self):
        return self.p


def as_exponent(p) -> PExponent:
    return p if isinstance(p, PExponent) else PExponent(p)


@dataclass(frozen=True)
class WirtingerConstant:
    p: PExponent
    c_p: float
    c_p_inverse: float
    method: str  # "closed_form" or "quadrature"


@dataclass(frozen=True)
class SupercriticalRange:
    p_low: float
    p_high: float
    threshold: float = BANACH_BOUND


def cp_inverse(p: float) -> float:
    """``1/C_p`` from the closed form, for a plain float ``p > 1``."""
    return 4.0 * math.pi * (p - 1.0) ** (1.0 / p) / (p * math.sin(math.pi / p))


def compute_cp(p) -> WirtingerConstant:
    """Sharp Wirtinger constant via the Gamma-reflection closed form.

    Examples
    --------
    >>> round(compute_cp(2).c_p_inverse, 9)
    6.283185307
    """
    p = as_exponent(p)
    if p.p - 1.0 < _DEGENERATE_GAP:
        raise DomainError(f"p = {p.p!r} is within {_DEGENERATE_GAP:g} of 1; C_p degenerates")
    inv = cp_inverse(p.p)
    return WirtingerConstant(p=p, c_p=1.0 / inv, c_p_inverse=inv, method="closed_form")


def _beta_integral(p: float, tol: float, limit: int) -> float:
    """``int_0^1 t^(-1/p) (1-t)^(1/p-1) dt`` with both singularities removed.

    On [0, 1/2] substitute ``t = s^q`` (q the conjugate exponent), on
    [1/2, 1] substitute ``1 - t = s^p``.  Both transformed integrands are
    bounded and analytic on the closed integration ranges.
    """
    q = p / (p - 1.0)
    left = lambda s: q * (1.0 - s**q) ** (1.0 / p - 1.0)  # noqa: E731
    right = lambda s: p * (1.0 - s**p) ** (-1.0 / p)  # noqa: E731
    total = 0.0
    for fun, upper in ((left, 0.5 ** (1.0 / q)), (right, 0.5 ** (1.0 / p))):
        value, abserr, info = integrate.quad(
            fun, 0.0, upper, epsabs=tol, epsrel=1e-14, limit=limit, full_output=True
        )[:3]
        if abserr > tol:
            raise ConvergenceError(
                f"beta quadrature at p={p!r} stopped with error estimate {abserr:.3g} > {tol:.3g}"
            )
        total += value
    return total


def cp_quadrature(p, tol: float = 1e-10, limit: int = 200) -> WirtingerConstant:
    """``C_p`` by direct numerical integration of the beta integral.

    Independent of :func:`compute_cp`: no special-function identity is used.
    The absolute error in ``c_p`` is kept below ``tol``.
    """
    p = as_exponent(p)
    if not 0.0 < tol <= 1e-4:
        raise DomainError(f"tol must lie in (0, 1e-4], got {tol!r}")
    if p.p - 1.0 < _DEGENERATE_GAP:
        raise DomainError(f"p = {p.p!r} is within {_DEGENERATE_GAP:g} of 1; C_p degenerates")
    prefactor = p.p / (4.0 * (p.p - 1.0) ** (1.0 / p.p))
    # the integral is >= pi and |dC/dI| = prefactor/I^2, so this keeps |dC| <= tol/2
    beta_tol = 0.5 * tol * math.pi**2 / prefactor
    beta = _beta_integral(p.p, beta_tol / 2.0, limit)
    c_p = prefactor / beta
    return WirtingerConstant(p=p, c_p=c_p, c_p_inverse=1.0 / c_p, method="quadrature")


def _bisect(fun, a: float, b: float, xtol: float) -> float:
    fa = fun(a)
    for _ in range(400):
        mid = 0.5 * (a + b)
        if b - a <= xtol or mid in (a, b):
            break
        fm = fun(mid)
        if (fm > 0) == (fa > 0):
            a, fa = mid, fm
        else:
            b = mid
    return 0.5 * (a + b)


def _lower_probes():
    # 0.01 grid from 2 down to 1.01, then geometric approach to 1
    yield from (2.0 - 0.01 * k for k in range(1, 100))
    yield from (1.0 + 10.0**-k for k in range(3, 10))


def _upper_probes():
    yield from (2.0 + 0.01 * k for k in range(1, 801))
    p = 10.0
    while p < 1e300:
        p *= 2.0
        yield p


def supercritical_range(threshold: float = BANACH_BOUND, xtol: float = 1e-10) -> SupercriticalRange:
    """Interval of exponents on which ``1/C_p`` exceeds ``threshold``.

    Brackets each crossing by scanning outward from ``p = 2`` (0.01 grid,
    then geometric steps towards the endpoints) and refines by bisection.
    """
    threshold = float(threshold)
    if threshold >= HILBERT_BOUND:
        raise DomainError(f"threshold {threshold!r} >= 2 pi: no supercritical interval")
    if threshold <= 4.0:
        raise DomainError(f"threshold {threshold!r} <= 4: interval is unbounded")
    g = lambda p: cp_inverse(p) - threshold  # noqa: E731

    roots = []
    for probes in (_lower_probes(), _upper_probes()):
        inside = 2.0
        for p in probes:
            if g(p) <= 0.0:
                roots.append(_bisect(g, min(p, inside), max(p, inside), xtol))
                break
            inside = p
        else:
            raise ConvergenceError(f"could not bracket crossing of threshold {threshold!r}")
    return SupercriticalRange(p_low=roots[0], p_high=roots[1], threshold=threshold)


def conjugate_symmetry_check(p) -> dict:
    p = as_exponent(p)
    c = compute_cp(p).c_p
    c_conj = compute_cp(p.conjugate).c_p
    return {"p": p.p, "conjugate": p.conjugate, "c_p": c, "c_p_conjugate": c_conj,
            "abs_diff": abs(c - c_conj)}


def remark2_bound(eps: float) -> float:
    """Lower bound on ``T L`` in a space whose norm is within ``1 +- eps`` of a Hilbert norm."""
    eps = float(eps)
    if not 0.0 <= eps < 1.0:
        raise DomainError(f"eps must satisfy 0 <= eps < 1, got {eps!r}")
    return HILBERT_BOUND * (1.0 - eps) / (1.0 + eps) ** 2


def figure_data(p_min: float = 1.05, p_max: float = 4.0, step: float = 0.01) -> np.ndarray:
    """Table of ``(p, 1/C_p)`` rows on a uniform grid starting at ``p_min``.

    Returns an array of shape ``(rows, 2)`` with
    ``rows = floor((p_max - p_min)/step) + 1``.
    """
    if not p_min > 1.0:
        raise DomainError(f"grid must stay above p = 1, got p_min={p_min!r}")
    if not p_max > p_min or not step > 0.0:
        raise DomainError("need p_min < p_max and step > 0")
    # the 1e-9 guard keeps representable endpoints like 4.0 on the grid
    rows = math.floor((p_max - p_min) / step + 1e-9) + 1
    ps = np.round(p_min + step * np.arange(rows), 12)
    values = np.array([cp_inverse(float(p)) for p in ps])
    return np.column_stack([ps, values])


def figure_csv(table: np.ndarray) -> str:
    buf = io.StringIO()
    buf.write("p,c_p_inverse\n")
    for p, v in table:
        buf.write(f"{p:.12g},{v:.12g}\n")
    return buf.getvalue()
