import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from periodbounds._errors import DomainError
from periodbounds.constants import compute_cp
from periodbounds.pfunc import (
    PeriodicGridFunction,
    band_limited,
    extremal_search,
    from_csv,
    lemma2_ratio,
    project_mean_zero,
    rayleigh_quotient,
    shift_difference_check,
    to_csv,
    tol_report,
    wirtinger_check,
)


def sampled(fun, N=512, T=1.0):
    t = np.arange(N) * (T / N)
    return PeriodicGridFunction(fun(t), T)


def circle(N=512, T=2 * math.pi):
    t = np.arange(N) * (T / N)
    w = 2 * math.pi / T
    return PeriodicGridFunction(np.column_stack([np.cos(w * t), np.sin(w * t)]), T)


def test_grid_function_validation():
    with pytest.raises(DomainError):
        PeriodicGridFunction(np.zeros(7))
    with pytest.raises(DomainError):
        PeriodicGridFunction(np.zeros(16), period_T=0)
    with pytest.raises(DomainError):
        PeriodicGridFunction(np.full(16, np.nan))
    u = PeriodicGridFunction(np.zeros(16))
    assert (u.N, u.n, u.dt) == (16, 1, 1 / 16)


def test_project_mean_zero():
    const = PeriodicGridFunction(np.full((32, 2), 3.7))
    assert np.max(np.abs(project_mean_zero(const).samples)) <= 1e-14

    s = sampled(lambda t: np.sin(2 * np.pi * t))
    assert np.max(np.abs(project_mean_zero(s).samples - s.samples)) <= 1e-14

    shifted = sampled(lambda t: np.sin(2 * np.pi * t) + 5)
    out = project_mean_zero(shifted)
    assert np.max(np.abs(out.samples - s.samples)) <= 1e-13
    assert abs(out.samples.mean()) <= 1e-14
    again = project_mean_zero(out)
    assert np.max(np.abs(again.samples - out.samples)) <= 1e-15


def test_rayleigh_first_and_second_mode():
    first = sampled(lambda t: np.sin(2 * np.pi * t))
    second = sampled(lambda t: np.sin(4 * np.pi * t))
    assert rayleigh_quotient(first, 2) == pytest.approx(1 / (2 * math.pi), abs=1e-4)
    assert rayleigh_quotient(second, 2) == pytest.approx(1 / (4 * math.pi), abs=1e-4)


def test_rayleigh_errors():
    with pytest.raises(DomainError):
        rayleigh_quotient(PeriodicGridFunction(np.ones(16)), 2)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000), st.floats(-50, 50).filter(lambda x: abs(x) > 1e-3),
       st.integers(1, 511), st.sampled_from([1.5, 2.0, 3.0]))
def test_quotients_homogeneous_and_translation_invariant(seed, lam, shift, p):
    u = band_limited(512, 2, K=5, rng=seed)
    q = rayleigh_quotient(u, p)
    assert rayleigh_quotient(u.replace(lam * u.samples), p) == pytest.approx(q, rel=1e-14)
    assert rayleigh_quotient(u.replace(np.roll(u.samples, shift, axis=0)), p) == pytest.approx(q, rel=1e-12)
    y = band_limited(128, 3, K=4, rng=seed)
    Q = lemma2_ratio(y, p).Q
    assert lemma2_ratio(y.replace(lam * y.samples), p).Q == pytest.approx(Q, rel=1e-14)
    assert lemma2_ratio(y.replace(np.roll(y.samples, shift % 128, axis=0)), p).Q == pytest.approx(Q, rel=1e-12)


def test_refinement_is_second_order():
    rng = np.random.default_rng(7)
    a, b = rng.standard_normal(4), rng.standard_normal(4)

    def q(N):
        t = np.arange(N) / N
        k = np.arange(1, 5)
        u = np.cos(2 * np.pi * np.outer(t, k)) @ a + np.sin(2 * np.pi * np.outer(t, k)) @ b
        return rayleigh_quotient(PeriodicGridFunction(u), 3.0)

    errs = [abs(q(N) - q(2 * N)) for N in (64, 128, 256)]
    assert errs[1] < errs[0] / 3 and errs[2] < errs[1] / 3


def test_wirtinger_extremal_is_tight():
    rep = wirtinger_check(sampled(lambda t: np.sin(2 * np.pi * t)), 2)
    assert rep.holds
    assert abs(rep.slack) <= rep.tol_report * rep.rhs
    assert rep.tol_report == tol_report(512) == 10 / 512**2


def test_wirtinger_second_mode_has_slack():
    rep = wirtinger_check(sampled(lambda t: np.sin(4 * np.pi * t)), 2)
    # the ratio is 1/(4 pi) = C_2 / 2 so the right-hand side is about four times the left
    assert rep.slack > 0.7 * rep.rhs


@pytest.mark.parametrize("p", [1.5, 2.0, 3.0])
def test_wirtinger_random_sweep(p):
    rng = np.random.default_rng(11)
    for _ in range(100):
        u = band_limited(256, int(rng.integers(1, 4)), K=8, T=float(rng.uniform(0.5, 3)), rng=rng)
        assert wirtinger_check(u, p).holds


def test_wirtinger_weighted_components():
    u = band_limited(256, 3, K=3, rng=2)
    weighted = PeriodicGridFunction(u.samples, u.period_T, weights=[0.5, 2.0, 1.0])
    assert wirtinger_check(weighted, 3).holds


def test_lemma2_unit_circle():
    # oracle: both double integrals equal 2 pi * int_0^{2 pi} 2|sin(u/2)| du = 16 pi
    inner, _ = integrate.quad(lambda u: 2 * abs(math.sin(u / 2)), 0, 2 * math.pi)
    exact = 2 * math.pi * inner
    assert exact == pytest.approx(16 * math.pi, rel=1e-12)
    rep = lemma2_ratio(circle(), 2)
    assert rep.numerator == pytest.approx(exact, abs=1e-2)
    assert rep.denominator == pytest.approx(exact, abs=1e-2)
    assert rep.Q == pytest.approx(1.0, abs=1e-3)
    assert rep.bound == pytest.approx(math.pi / 3)
    assert rep.holds and rep.gap > 0.04


def test_lemma2_scales_linearly_with_period():
    ratios = [lemma2_ratio(circle(256, T), 2).Q / T for T in (1.0, 2 * math.pi, 10.0)]
    assert max(ratios) - min(ratios) <= 1e-6


@pytest.mark.parametrize("p", [1.5, 2.0, 3.0])
def test_lemma2_random_sweep(p):
    rng = np.random.default_rng(3)
    for _ in range(100):
        y = band_limited(128, 3, K=5, T=float(rng.uniform(0.5, 7)), rng=rng, mean_zero=False)
        rep = lemma2_ratio(y, p)
        assert rep.holds and rep.Q <= rep.bound * (1 + tol_report(128))


def test_lemma2_constant_rejected():
    with pytest.raises(DomainError):
        lemma2_ratio(PeriodicGridFunction(np.ones((16, 2))), 2)


def test_shift_difference_half_period():
    rep = shift_difference_check(circle(), math.pi, 2)
    assert rep.holds


def test_shift_difference_quarter_period_near_tight():
    rep = shift_difference_check(circle(), math.pi / 2, 2)
    assert rep.holds
    assert abs(rep.slack) <= rep.tol_report * rep.rhs


def test_shift_difference_two_harmonics():
    N, T = 384, 3.0
    t = np.arange(N) * T / N
    w = 2 * math.pi / T
    x = np.column_stack([np.cos(w * t) + 0.3 * np.sin(2 * w * t), np.sin(w * t) - 0.2 * np.cos(2 * w * t)])
    assert shift_difference_check(PeriodicGridFunction(x, T), T / 3, 3).holds


def test_shift_must_be_grid_aligned():
    with pytest.raises(DomainError):
        shift_difference_check(circle(), 0.1234, 2)


@pytest.mark.parametrize("p", [2.0, 3.0, 1.5])
def test_extremal_search_reaches_sharp_constant(p):
    res = extremal_search(p, N=512, budget=2000, seed=1)
    c = compute_cp(p).c_p
    assert res.q == pytest.approx(c, rel=1e-2)
    assert res.q <= c * (1 + tol_report(512))
    assert all(b >= a for a, b in zip(res.trace, res.trace[1:]))
    assert res.status in ("converged", "converged_low_confidence")


def test_extremal_p2_is_shifted_sinusoid():
    res = extremal_search(2.0, N=512, budget=500, seed=5, T=2.0)
    u = res.u.samples[:, 0]
    t = res.u.times
    basis = np.column_stack([np.cos(np.pi * t), np.sin(np.pi * t)])
    coef, *_ = np.linalg.lstsq(basis, u, rcond=None)
    corr = np.linalg.norm(basis @ coef) / np.linalg.norm(u)
    assert corr >= 0.999
    assert res.q == pytest.approx(2.0 / (2 * math.pi), rel=1e-4)


def test_extremal_conjugate_pair_agree():
    a = extremal_search(1.5, N=512, seed=0).q
    b = extremal_search(3.0, N=512, seed=0).q
    assert a == pytest.approx(b, rel=1e-2)


def test_extremal_low_budget_flags_confidence():
    res = extremal_search(1.5, N=256, budget=3, seed=0)
    assert res.status == "converged_low_confidence"
    with pytest.raises(DomainError):
        extremal_search(2.0, N=32)


def test_extremal_is_deterministic():
    a = extremal_search(3.0, N=128, budget=100, seed=9)
    b = extremal_search(3.0, N=128, budget=100, seed=9)
    assert to_csv(a.u) == to_csv(b.u) and a.q == b.q


def test_csv_roundtrip():
    u = band_limited(64, 3, K=3, T=2.5, rng=4)
    text = to_csv(u)
    assert text.splitlines()[0] == "# T=2.5 N=64 n=3"
    assert text.splitlines()[1] == "t,x0,x1,x2"
    back = from_csv(text)
    assert back.period_T == 2.5 and np.array_equal(back.samples, u.samples)


def test_csv_rejects_bad_metadata():
    with pytest.raises(DomainError):
        from_csv("t,x0\n0,1\n")
    with pytest.raises(DomainError):
        from_csv("# T=1 N=9 n=1\nt,x0\n0,1\n")
