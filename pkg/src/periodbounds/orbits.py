"""Built-in Lipschitz vector fields, periodic orbits and their ``T L`` certificates.

Three fields are available, all linear:

* ``planar_rotation`` -- ``x' = L y, y' = -L x`` (period ``2 pi / L``);
* ``linear`` -- ``x' = M x`` for a user matrix;
* ``remark1_averaging`` -- on a finite measure space with disjoint atom
  sets ``A`` and ``B``::

      f(z) = -chi_B / mu(A) * int_A z dmu + chi_A / mu(B) * int_B z dmu

  whose orbit ``z(t) = -cos(t) chi_A + sin(t) chi_B`` has period ``2 pi``
  when ``mu(A) = mu(B)``.

``L^p(M, mu)`` is realized on finitely many atoms, so its norm is the
weighted ell^p norm ``(sum_i mu_i |z_i|^p)^(1/p)``.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ._errors import ConvergenceError, DomainError
from .constants import BANACH_BOUND, HILBERT_BOUND, compute_cp
from .pfunc import PeriodicGridFunction

__all__ = [
    "FiniteMeasureSpace",
    "FieldSpec",
    "SamplingCloud",
    "OrbitCertificate",
    "TOL_CERT",
    "builtin_field",
    "integrate",
    "detect_period",
    "estimate_lipschitz",
    "operator_norm",
    "certify_orbit",
    "orbit_grid",
]

TOL_CERT = 1e-3
_CHUNK = 1024


@dataclass(frozen=True, eq=False)
class FiniteMeasureSpace:
    weights: np.ndarray
    A: tuple
    B: tuple
    labels: tuple | None = None

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float).ravel()
        if w.size == 0 or np.any(~np.isfinite(w)) or np.any(w <= 0):
            raise DomainError("atom weights must be finite and positive")
        A = tuple(int(i) for i in self.A)
        B = tuple(int(i) for i in self.B)
        if not A or not B:
            raise DomainError("sets A and B must be non-empty")
        if set(A) & set(B):
            raise DomainError("sets A and B must be disjoint")
        if any(not 0 <= i < w.size for i in A + B):
            raise DomainError("atom index out of range")
        labels = tuple(self.labels) if self.labels is not None else tuple(str(i) for i in range(w.size))
        if len(labels) != w.size:
            raise DomainError("need one label per atom")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)
        object.__setattr__(self, "labels", labels)

    @property
    def mu_A(self) -> float:
        return float(self.weights[list(self.A)].sum())

    @property
    def mu_B(self) -> float:
        return float(self.weights[list(self.B)].sum())


@dataclass(frozen=True, eq=False)
class FieldSpec:
    """An evaluable linear field ``f(x) = matrix @ x`` and the norm it is measured in.

    ``norm_p`` may be any exponent in ``[1, inf]``; ``weights`` turn the
    ell^p norm into the ``L^p(mu)`` norm of a finite atom space.
    """

    kind: str
    params: dict
    matrix: np.ndarray
    norm_p: float = 2.0
    weights: np.ndarray | None = None
    nominal_L: float | None = None

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def __call__(self, x):
        return np.asarray(x, dtype=float) @ self.matrix.T

    def norm(self, v):
        v = np.abs(np.asarray(v, dtype=float))
        if math.isinf(self.norm_p):
            if self.weights is not None:
                v = np.where(self.weights > 0, v, 0.0)
            return v.max(axis=-1)
        a = v**self.norm_p
        if self.weights is not None:
            a = a * self.weights
        return a.sum(axis=-1) ** (1.0 / self.norm_p)

    def describe(self) -> dict:
        return {"kind": self.kind, "params": _jsonable(self.params)}


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, FiniteMeasureSpace):
        return {"weights": obj.weights.tolist(), "A": list(obj.A), "B": list(obj.B)}
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    return obj


def _check_p(p) -> float:
    p = float(p)
    if not p >= 1.0:
        raise DomainError(f"norm exponent must be >= 1, got {p!r}")
    return p


def builtin_field(kind: str, params: dict | None = None, p: float = 2.0) -> FieldSpec:
    """Construct a built-in field measured in the ell^p (or ``L^p(mu)``) norm.

    ``planar_rotation`` (alias ``rotation``) takes ``L``; ``linear`` takes
    ``matrix``; ``remark1_averaging`` (alias ``remark1``) takes either a
    ``space`` (:class:`FiniteMeasureSpace`) or ``weights``, ``A`` and ``B``.
    """
    params = dict(params or {})
    p = _check_p(p)
    kind = {"rotation": "planar_rotation", "remark1": "remark1_averaging"}.get(kind, kind)

    if kind == "planar_rotation":
        L = float(params.get("L", 1.0))
        if not (math.isfinite(L) and L > 0):
            raise DomainError(f"rotation rate must be positive, got {L!r}")
        M = np.array([[0.0, L], [-L, 0.0]])
        # the quarter-turn swap-with-sign is an isometry of every ell^p norm on R^2
        return FieldSpec(kind, {"L": L}, M, p, None, L)

    if kind == "linear":
        try:
            M = np.array(params["matrix"], dtype=float)
        except (KeyError, TypeError, ValueError) as exc:
            raise DomainError("linear field needs a numeric 'matrix'") from exc
        if M.ndim != 2 or M.shape[0] != M.shape[1] or M.size == 0 or not np.all(np.isfinite(M)):
            raise DomainError(f"malformed matrix of shape {M.shape}")
        nominal = operator_norm(M, p)
        return FieldSpec(kind, {"matrix": M.tolist()}, M, p, None, nominal)

    if kind == "remark1_averaging":
        space = params.get("space")
        if space is None:
            try:
                space = FiniteMeasureSpace(params["weights"], params["A"], params["B"])
            except KeyError as exc:
                raise DomainError("remark1 field needs 'space' or 'weights', 'A', 'B'") from exc
        w = space.weights
        M = np.zeros((w.size, w.size))
        for i in space.B:
            M[i, list(space.A)] = -w[list(space.A)] / space.mu_A
        for i in space.A:
            M[i, list(space.B)] = w[list(space.B)] / space.mu_B
        nominal = 1.0 if math.isclose(space.mu_A, space.mu_B, rel_tol=1e-12) else None
        return FieldSpec(kind, {"space": space}, M, p, w, nominal)

    raise DomainError(f"unknown field kind {kind!r}")


def operator_norm(matrix, p: float) -> float | None:
    """Exact induced ell^p operator norm where a closed form exists (p in {1, 2, inf})."""
    M = np.asarray(matrix, dtype=float)
    if p == 2.0:
        return float(np.linalg.norm(M, 2))
    if p == 1.0:
        return float(np.abs(M).sum(axis=0).max())
    if math.isinf(p):
        return float(np.abs(M).sum(axis=1).max())
    return None


def _rk4_step(field: FieldSpec, x, h):
    k1 = field(x)
    k2 = field(x + 0.5 * h * k1)
    k3 = field(x + 0.5 * h * k2)
    k4 = field(x + h * k3)
    return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def integrate(field: FieldSpec, x0, dt: float, steps: int) -> np.ndarray:
    """Classical fixed-step RK4; returns the ``steps + 1`` states including ``x0``."""
    if not dt > 0:
        raise DomainError(f"dt must be positive, got {dt!r}")
    steps = int(steps)
    if steps < 1:
        raise DomainError("steps must be >= 1")
    x = np.asarray(x0, dtype=float).copy()
    if x.shape != (field.dim,):
        raise DomainError(f"initial state must have shape ({field.dim},), got {x.shape}")
    out = np.empty((steps + 1, x.size))
    out[0] = x
    for k in range(1, steps + 1):
        # overflow is reported below as a ConvergenceError
        with np.errstate(over="ignore", invalid="ignore"):
            x = _rk4_step(field, x, dt)
        if not np.all(np.isfinite(x)):
            raise ConvergenceError(f"state became non-finite at step {k}")
        out[k] = x
    return out


def _euclid_rate(field, x, x0):
    return float(np.dot(x - x0, field(x)))


def _refine_closure(field, traj, x0, dt, i):
    """Locate the zero of ``d/dt |x(t) - x0|^2`` on ``[t_{i-1}, t_{i+1}]`` by bisection."""
    lo, hi = (i - 1) * dt, (i + 1) * dt
    t_base, base = lo, traj[i - 1]

    def state(t):
        return _rk4_step(field, base, t - t_base)

    g_lo = _euclid_rate(field, state(lo), x0)
    g_hi = _euclid_rate(field, state(hi), x0)
    if g_lo > 0 or g_hi < 0:
        return i * dt, traj[i]
    while hi - lo > 1e-13 * max(1.0, hi):
        mid = 0.5 * (lo + hi)
        if _euclid_rate(field, state(mid), x0) < 0:
            lo = mid
        else:
            hi = mid
    t = 0.5 * (lo + hi)
    return t, state(t)


def detect_period(field: FieldSpec, x0, tol: float = 1e-6, T_max: float = 4 * math.pi,
                  steps: int = 40000, max_divisor: int = 8) -> float:
    """Smallest ``T <= T_max`` with ``||x(T) - x0|| <= tol``.

    Scans the closure distance along an RK4 trajectory, refines each local
    minimum by bisection and, once one closes within ``tol``, re-tests the
    divisors ``T/k`` so a multiple of the period is never returned.
    """
    x0 = np.asarray(x0, dtype=float)
    if not (T_max > 0 and tol > 0):
        raise DomainError("need T_max > 0 and tol > 0")
    dt = T_max / steps
    traj = integrate(field, x0, dt, steps)
    d = field.norm(traj - x0)
    if d.max() == 0.0:
        raise DomainError("x0 is an equilibrium; there is no non-constant orbit")
    left = np.flatnonzero(d >= 0.5 * d.max())[0]

    for i in range(max(left, 1), steps):
        if not (d[i] <= d[i - 1] and d[i] <= d[i + 1]):
            continue
        T, xT = _refine_closure(field, traj, x0, dt, i)
        if field.norm(xT - x0) > tol:
            continue
        for k in range(max_divisor, 1, -1):
            sub = T / k
            n_sub = max(int(math.ceil(sub / dt)), 1)
            x_sub = integrate(field, x0, sub / n_sub, n_sub)[-1]
            if field.norm(x_sub - x0) <= tol:
                return sub
        return T
    raise ConvergenceError(f"no_period_found: orbit does not close within tol={tol:g} on (0, {T_max:g}]")


@dataclass(frozen=True, eq=False)
class SamplingCloud:
    """Pair-sampling region: Gaussian tubes of ``radius`` around ``anchors``.

    Half of each chunk pairs points of the tube with each other; the other
    half pairs each point with a nearby copy at ``radius * local_scale``.
    """

    anchors: np.ndarray
    radius: float
    n_pairs: int = 10_000
    local_scale: float = 1e-3

    def __post_init__(self):
        a = np.atleast_2d(np.asarray(self.anchors, dtype=float))
        object.__setattr__(self, "anchors", a)
        if self.n_pairs < 1:
            raise DomainError("n_pairs must be positive")
        if not self.radius >= 0:
            raise DomainError("radius must be non-negative")


def _chunk_ratios(field: FieldSpec, cloud: SamplingCloud, seed: int, index: int) -> np.ndarray:
    rng = np.random.default_rng([seed, index])
    m, n = cloud.anchors.shape
    half = _CHUNK // 2
    x = cloud.anchors[rng.integers(m, size=_CHUNK)] + cloud.radius * rng.standard_normal((_CHUNK, n))
    y = np.empty_like(x)
    y[:half] = cloud.anchors[rng.integers(m, size=half)] + cloud.radius * rng.standard_normal((half, n))
    y[half:] = x[half:] + cloud.radius * cloud.local_scale * rng.standard_normal((_CHUNK - half, n))
    # interleave so that any prefix of the chunk mixes both pair types
    order = np.empty(_CHUNK, dtype=int)
    order[0::2] = np.arange(half)
    order[1::2] = np.arange(half, _CHUNK)
    x, y = x[order], y[order]
    den = field.norm(x - y)
    num = field.norm(field(x) - field(y))
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(den > 0, num / den, np.nan)


def estimate_lipschitz(field: FieldSpec, cloud: SamplingCloud, seed: int = 0, workers: int = 1) -> float:
    """Largest sampled ``||f(x) - f(y)|| / ||x - y||``: a lower bound on the Lipschitz constant.

    Pairs come in fixed chunks with per-chunk seeds, so a run with ``k``
    pairs sees a prefix of the pairs of a run with ``2k`` and the result
    does not depend on ``workers``.
    """
    if cloud.radius == 0 and np.ptp(cloud.anchors, axis=0).max() == 0:
        raise DomainError("degenerate cloud: all sample points coincide")
    n_chunks = -(-cloud.n_pairs // _CHUNK)
    sizes = [min(_CHUNK, cloud.n_pairs - c * _CHUNK) for c in range(n_chunks)]

    def run(c):
        r = _chunk_ratios(field, cloud, seed, c)[: sizes[c]]
        return np.nanmax(r) if np.any(np.isfinite(r)) else -np.inf

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            best = max(pool.map(run, range(n_chunks)))
    else:
        best = max(run(c) for c in range(n_chunks))
    if not np.isfinite(best):
        raise DomainError("degenerate cloud: no pair of distinct points")
    return float(best)


@dataclass
class OrbitCertificate:
    field: dict
    p: float
    period_T: float
    lipschitz_hat: float
    TL: float
    bounds: list
    tolerances: dict
    lipschitz_exact: float | None = None
    period_halving_diff: float = 0.0
    notes: list = field(default_factory=list)

    def to_json(self) -> str:
        doc = {
            "field": self.field,
            "p": self.p,
            "T": self.period_T,
            "L_hat": self.lipschitz_hat,
            "TL": self.TL,
            "bounds": self.bounds,
            "tolerances": self.tolerances,
            "L_exact": self.lipschitz_exact,
            "period_halving_diff": self.period_halving_diff,
            "notes": self.notes,
        }
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"

    def all_satisfied(self) -> bool:
        return all(b["satisfied"] for b in self.bounds)


def _applicable_bounds(p: float) -> list:
    bounds = [("banach", BANACH_BOUND)]
    if p == 2.0:
        bounds.append(("hilbert", HILBERT_BOUND))
    if 1.0 < p < math.inf:
        bounds.append(("wirtinger", compute_cp(p).c_p_inverse))
    return bounds


def certify_orbit(field: FieldSpec, x0, T_max: float | None = None, tol: float = 1e-8,
                  n_pairs: int = 10_000, seed: int = 0, steps: int = 40000,
                  workers: int = 1) -> OrbitCertificate:
    """Measure ``T`` and ``L`` for the orbit through ``x0`` and compare ``T L`` with the lower bounds.

    The period is computed at ``steps`` and ``2 * steps`` RK4 steps; their
    difference is reported as ``period_halving_diff`` and must stay below
    ``1e-6``.
    """
    x0 = np.asarray(x0, dtype=float)
    size = float(field.norm(x0))
    if size == 0.0:
        raise DomainError("x0 must be non-zero")
    if T_max is None:
        probe = SamplingCloud(x0, radius=size, n_pairs=2048)
        # T L stays well below 64 for every built-in field
        T_max = 64.0 / estimate_lipschitz(field, probe, seed)
    T = detect_period(field, x0, tol=tol, T_max=T_max, steps=steps)
    T_fine = detect_period(field, x0, tol=tol, T_max=T_max, steps=2 * steps)
    halving = abs(T - T_fine)
    if halving > 1e-6:
        raise ConvergenceError(f"period changed by {halving:.3g} under step halving")

    orbit = integrate(field, x0, T_fine / 256, 256)[:-1]
    spread = float(np.max(field.norm(orbit - orbit.mean(axis=0))))
    cloud = SamplingCloud(orbit, radius=0.1 * spread, n_pairs=n_pairs)
    L_hat = estimate_lipschitz(field, cloud, seed, workers=workers)
    exact = operator_norm(field.matrix, field.norm_p) if field.weights is None else None

    TL = T_fine * L_hat
    p = field.norm_p
    bounds = [
        {"name": name, "value": value, "satisfied": bool(TL >= value - TOL_CERT),
         "tight": bool(abs(TL - value) <= TOL_CERT)}
        for name, value in _applicable_bounds(p)
    ]
    notes = ["L_hat is a sampled lower bound on the Lipschitz constant"]
    if field.kind == "remark1_averaging" and field.nominal_L is None:
        notes.append("unequal masses mu(A) != mu(B): Lipschitz constant measured, not assumed")
    return OrbitCertificate(
        field=field.describe(),
        p=p,
        period_T=T_fine,
        lipschitz_hat=L_hat,
        TL=TL,
        bounds=bounds,
        tolerances={"tol_cert": TOL_CERT, "closure_tol": tol, "n_pairs": n_pairs, "seed": seed},
        lipschitz_exact=exact,
        period_halving_diff=halving,
        notes=notes,
    )


def orbit_grid(field: FieldSpec, x0, T: float, N: int = 512, substeps: int = 8) -> PeriodicGridFunction:
    """Sample one period of the orbit on ``N`` uniform points, ready for ``pfunc`` checks."""
    traj = integrate(field, x0, T / (N * substeps), N * substeps)[:-1:substeps]
    return PeriodicGridFunction(traj, T, field.weights)
