"""Acceptance gate.

Run with ``pytest tests/test_acceptance.py`` (or execute this file); the
terminal summary ends with one PASS/FAIL line per criterion.  Criteria 6, 10
and 12 go through the command-line interface so the byte comparison covers
the artifacts a user would actually keep.
"""

import json
import math

import numpy as np
import pytest
from scipy import integrate as sp_integrate

from periodbounds import cli
from periodbounds.constants import (
    compute_cp,
    conjugate_symmetry_check,
    cp_inverse,
    cp_quadrature,
    figure_data,
    remark2_bound,
    supercritical_range,
)
from periodbounds.orbits import builtin_field, certify_orbit
from periodbounds.pfunc import (
    PeriodicGridFunction,
    band_limited,
    from_csv,
    lemma2_ratio,
    tol_report,
    wirtinger_check,
)

criterion = pytest.mark.criterion
PS = (1.5, 2.0, 3.0)
TWO_PI = 2 * math.pi


def run_cli(argv):
    code = cli.main([str(a) for a in argv])
    assert code == 0, f"{argv} exited with {code}"


def read(path):
    with open(path, "rb") as fh:
        return fh.read()


@pytest.fixture(scope="module")
def wirtinger_runs(tmp_path_factory):
    """Two independent CLI runs of the extremal search per exponent."""
    runs = {}
    for p in PS:
        payloads = []
        for rep in (0, 1):
            d = tmp_path_factory.mktemp(f"wirt_{p}_{rep}")
            run_cli(["wirtinger", "--p", p, "--N", 512, "--seed", 0,
                     "--out", d / "report.json", "--grid-out", d / "u.csv"])
            payloads.append((read(d / "report.json"), read(d / "u.csv")))
        runs[p] = payloads
    return runs


@pytest.fixture(scope="module")
def optimizer_runs(tmp_path_factory):
    runs = {}
    for p in PS:
        payloads = []
        for rep in (0, 1):
            d = tmp_path_factory.mktemp(f"opt_{p}_{rep}")
            run_cli(["optimize", "--p", p, "--n", 2, "--K", 3, "--budget", 20000, "--seed", 0,
                     "--out", d / "result.json", "--trace-out", d / "trace.csv"])
            payloads.append((read(d / "result.json"), read(d / "trace.csv")))
        runs[p] = payloads
    return runs


@criterion(1, "Hilbert constant 1/C_2 = 2 pi")
def test_c1_hilbert_constant():
    assert abs(compute_cp(2).c_p_inverse - TWO_PI) <= 1e-10


@criterion(2, "1/C_p > 6 on [1.43, 3.35]; roots bracketed")
def test_c2_supercritical_range():
    grid = np.round(np.arange(1.43, 3.35 + 1e-9, 0.005), 12)
    assert grid[0] == 1.43 and grid[-1] == 3.35
    assert all(cp_inverse(p) > 6 for p in grid)
    r = supercritical_range(6.0)
    assert 1.41 < r.p_low < 1.43
    assert 3.35 < r.p_high < 3.40
    # bisection oracle on the closed form, independent of the library's bracketing
    def root(lo, hi):
        f = lambda p: cp_inverse(p) - 6
        for _ in range(80):
            mid = 0.5 * (lo + hi)
            lo, hi = (mid, hi) if f(lo) * f(mid) > 0 else (lo, mid)
        return 0.5 * (lo + hi)
    assert r.p_low == pytest.approx(root(1.1, 2.0), abs=1e-9)
    assert r.p_high == pytest.approx(root(2.0, 5.0), abs=1e-9)


@criterion(3, "closed form vs singular quadrature to 1e-8")
def test_c3_oracle_agreement():
    for p in np.geomspace(1.01, 50, 50):
        assert abs(compute_cp(p).c_p - cp_quadrature(p, 1e-8).c_p) <= 1e-8


@criterion(4, "conjugate symmetry to 1e-12")
def test_c4_conjugate_symmetry():
    rng = np.random.default_rng(2024)
    for p in np.exp(rng.uniform(math.log(1.01), math.log(100), 100)):
        assert conjugate_symmetry_check(p)["abs_diff"] <= 1e-12


@criterion(5, "figure table unimodal, peak 2 pi at p = 2, crosses 6 at the roots")
def test_c5_figure():
    table = figure_data(1.05, 4.0, 0.01)
    p, v = table[:, 0], table[:, 1]
    k = int(np.argmax(v))
    assert p[k] == 2.0 and v[k] == pytest.approx(TWO_PI, abs=1e-12)
    assert np.all(np.diff(v[:k + 1]) > 0) and np.all(np.diff(v[k:]) < 0)
    r = supercritical_range(6.0)
    assert np.array_equal(v > 6, (p > r.p_low) & (p < r.p_high))


@criterion(6, "discrete Wirtinger extremal within 1% of C_p; sinusoid at p = 2")
@pytest.mark.parametrize("p", PS)
def test_c6_extremal_sharpness(wirtinger_runs, p):
    report_bytes, grid_bytes = wirtinger_runs[p][0]
    res = json.loads(report_bytes)["result"]
    assert abs(res["relative_excess"]) <= 1e-2
    assert res["wirtinger"]["holds"]
    if p == 2.0:
        u = from_csv(grid_bytes.decode())
        w = TWO_PI / u.period_T
        basis = np.column_stack([np.cos(w * u.times), np.sin(w * u.times)])
        x = u.samples[:, 0]
        coef, *_ = np.linalg.lstsq(basis, x, rcond=None)
        assert abs(np.dot(basis @ coef, x)) / (np.linalg.norm(basis @ coef) * np.linalg.norm(x)) >= 0.999


@criterion(7, "Wirtinger inequality on 100 random functions per p")
@pytest.mark.parametrize("p", PS)
def test_c7_wirtinger_sweep(p):
    rng = np.random.default_rng(7)
    for _ in range(100):
        u = band_limited(512, int(rng.integers(1, 4)), K=int(rng.integers(1, 12)),
                         T=float(rng.uniform(0.2, 5)), rng=rng)
        rep = wirtinger_check(u, p)
        assert rep.tol_report == tol_report(512)
        assert rep.holds, vars(rep)


@criterion(8, "curve ratio Q <= T/6 on 100 random curves in R^3 per p; unit circle closed forms")
@pytest.mark.parametrize("p", PS)
def test_c8_lemma2_sweep(p):
    rng = np.random.default_rng(8)
    N = 256
    for _ in range(100):
        y = band_limited(N, 3, K=int(rng.integers(1, 8)), T=float(rng.uniform(0.5, 8)), rng=rng,
                         mean_zero=False)
        rep = lemma2_ratio(y, p)
        assert rep.Q <= y.period_T / 6 + tol_report(N), vars(rep)


@criterion(8, "curve ratio Q <= T/6 on 100 random curves in R^3 per p; unit circle closed forms")
def test_c8_unit_circle():
    inner, _ = sp_integrate.quad(lambda u: 2 * abs(math.sin(u / 2)), 0, TWO_PI)
    exact = TWO_PI * inner
    t = np.arange(512) * TWO_PI / 512
    rep = lemma2_ratio(PeriodicGridFunction(np.column_stack([np.cos(t), np.sin(t)]), TWO_PI), 2)
    assert rep.Q == pytest.approx(1.0, abs=1e-3)
    assert rep.numerator == pytest.approx(16 * math.pi, abs=1e-2)
    assert rep.denominator == pytest.approx(16 * math.pi, abs=1e-2)
    assert exact == pytest.approx(16 * math.pi, abs=1e-9)


@criterion(9, "orbit certificates: rotation tight in Hilbert space; two-atom field")
def test_c9_rotation():
    cert = certify_orbit(builtin_field("planar_rotation", {"L": 1.0}, 2.0), [1.0, 0.0])
    assert abs(cert.period_T - TWO_PI) <= 1e-6
    assert abs(cert.lipschitz_hat - 1.0) <= 1e-12
    assert abs(cert.TL - TWO_PI) <= 1e-4
    hilbert = next(b for b in cert.bounds if b["name"] == "hilbert")
    assert hilbert["satisfied"] and hilbert["tight"]


@criterion(9, "orbit certificates: rotation tight in Hilbert space; two-atom field")
@pytest.mark.parametrize("p", PS)
def test_c9_two_atom(p):
    field = builtin_field("remark1_averaging", {"weights": [1.0, 1.0], "A": [0], "B": [1]}, p)
    cert = certify_orbit(field, [-1.0, 0.0])
    assert abs(cert.TL - TWO_PI) <= 1e-4
    # equality at p = 2, so the comparison carries the same 1e-4 as TL itself
    assert cert.TL >= compute_cp(p).c_p_inverse - 1e-4
    assert cert.all_satisfied()


@criterion(10, "optimizer brackets the sharp value and never undercuts the floor")
@pytest.mark.parametrize("p", PS)
def test_c10_optimizer(optimizer_runs, p):
    res = json.loads(optimizer_runs[p][0][0])["result"]
    lower = TWO_PI if p == 2.0 else compute_cp(p).c_p_inverse
    assert lower - 1e-3 <= res["best_TL"] <= TWO_PI + 0.05
    assert res["best_TL"] >= max(6.0, compute_cp(p).c_p_inverse) - 1e-3
    trace = [float(line.split(",")[1]) for line in optimizer_runs[p][0][1].decode().splitlines()[1:]]
    assert min(trace) >= max(6.0, compute_cp(p).c_p_inverse) - 1e-3


@criterion(11, "perturbed-norm bound: 2 pi at eps = 0 and decreasing")
def test_c11_remark2():
    assert remark2_bound(0.0) == TWO_PI
    vals = [remark2_bound(e) for e in np.round(np.arange(0, 0.9 + 1e-9, 0.01), 12)]
    assert len(vals) == 91
    assert all(b < a for a, b in zip(vals, vals[1:]))


@criterion(12, "reruns with the same seeds give byte-identical artifacts")
@pytest.mark.parametrize("p", PS)
def test_c12_determinism(wirtinger_runs, optimizer_runs, p):
    assert wirtinger_runs[p][0] == wirtinger_runs[p][1]
    assert optimizer_runs[p][0] == optimizer_runs[p][1]


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q"]))
