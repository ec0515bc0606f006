"""Acceptance criteria 1-11, each printing one PASS/FAIL line with its measured value and runtime."""
import math
import time

import numpy as np
import pytest
import sympy as sp

from starq.grid import GridSpec
from starq.harness import (
    INVARIANCE_ELEMENTS,
    ScenarioConfig,
    _test_points,
    intertwiner_consistency,
    run_scenario,
    semiclassical_series,
    seminorm_window_drift,
)
from starq.intertwiner import invariance_residual, moyal_invariance_residual, trace_defect
from starq.lie import E, F, H, AlgebraElement
from starq.moyal import DeformationProfile
from starq.orbit import gaussian_panel
from starq.oscillatory import PairAmplitude, a, l, osc_integral, pair_integral
from starq.star_exp import ode_residual

G = GridSpec()  # 256 x 256
PAN = gaussian_panel()


class Timer:
    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.s = time.perf_counter() - self.t0


def check(verdict, label, ok, limit, timer, detail):
    fast = timer.s < limit
    verdict(label, ok and fast, f"{detail}; runtime {timer.s:.1f}s (limit {limit:.0f}s)")
    assert ok, detail
    assert fast, f"runtime {timer.s:.1f}s exceeds {limit}s"


def worst_of(report, prefix=""):
    recs = [r for r in report.records if r.name.startswith(prefix)]
    return recs, max(r.value for r in recs)


def test_c01_exact_algebra(verdict):
    with Timer() as t:
        rep = run_scenario(ScenarioConfig(suite="group", random_cases=1000, seed=2024))
    recs, worst = worst_of(rep)
    ok = all(r.value <= 1e-12 for r in recs)
    check(verdict, "1 exact algebra", ok, 5, t, f"{len(recs)} checks x 1000 cases, worst {worst:.2e} <= 1e-12")


def test_c02_moment_homomorphism(verdict):
    with Timer() as t:
        rep = run_scenario(ScenarioConfig(suite="orbit", random_cases=1000, seed=2024))
    (hom,) = [r for r in rep.records if r.name == "orbit.moment_homomorphism"]
    check(verdict, "2 moment homomorphism", hom.value <= 1e-10, 1, t,
          f"1000 points, worst {hom.value:.2e} <= 1e-10")


def test_c03_covariance(verdict):
    with Timer() as t:
        rep = run_scenario(ScenarioConfig(suite="covariance", theta_list=(0.1, 0.5, 1.0)))
    recs, worst = worst_of(rep)
    ok = len(recs) == 27 and worst <= 1e-6
    check(verdict, "3 covariance", ok, 60, t, f"9 pairs x 3 theta on 256x256, worst {worst:.2e} <= 1e-6")


def test_c04_oscillatory_regularization(verdict):
    theta = 0.7
    R = sp.sinh(2 * a)
    with Timer() as t:
        g = sp.exp(-R**2 - l**2)
        schwartz = PairAmplitude([(g, g), (g * l, g * sp.cosh(2 * a))])
        reg = osc_integral(schwartz, theta, (2, 2, 2, 2))
        direct = osc_integral(schwartz, theta, regularize=False)
        d4 = abs(reg.value - direct.value) / abs(direct.value)
        d2 = max(abs(pair_integral(g * (1 + l), s, theta, 2, 2) - pair_integral(g * (1 + l), s, theta,
                                                                                    regularize=False))
                 for s in (-1, 1))
        poly = PairAmplitude([(1 + l**2, sp.cosh(2 * a) * sp.exp(-R**2)), (sp.Integer(1), l)])
        r2 = osc_integral(poly, theta, (2, 2, 2, 2), escalate=False)
        r3 = osc_integral(poly, theta, (3, 3, 3, 3), escalate=False)
        dord = abs(r2.value - r3.value) / abs(r3.value)
    ok = max(d4, d2) <= 1e-6 and dord <= 1e-6 and reg.converged and r2.converged and r3.converged
    check(verdict, "4 oscillatory regularization", ok, 120, t,
          f"regularized-direct {max(d4, d2):.2e}, orders 2222 vs 3333 {dord:.2e} (<= 1e-6)")


def test_c05_intertwiner_consistency(verdict):
    pairs = [(0, 1), (2, 3)]
    with Timer() as t:
        vals = {(th, p): intertwiner_consistency(PAN[p[0]], PAN[p[1]], DeformationProfile.tracial_profile(th), G)
                for th in (0.2, 0.5, 1.0) for p in pairs}
    worst = max(vals.values())
    per_theta = ", ".join(f"theta={th}: {max(v for (s, _), v in vals.items() if s == th):.1e}"
                          for th in (0.2, 0.5, 1.0))
    check(verdict, "5 intertwiner consistency", worst <= 1e-4, 300, t, f"{per_theta} (<= 1e-4)")


def test_c06_invariance(verdict):
    theta = 0.5
    prof = DeformationProfile.tracial_profile(theta)
    pts = _test_points(1)
    with Timer() as t:
        inv = [invariance_residual(g, PAN[0], PAN[1], prof, pts, G) for g in INVARIANCE_ELEMENTS]
        ctrl = [moyal_invariance_residual(g, PAN[0], PAN[1], theta, pts) for g in INVARIANCE_ELEMENTS]
    assert all(g.a != 0 for g in INVARIANCE_ELEMENTS)
    ok = max(inv) <= 1e-3 and min(ctrl) > 1e-3
    check(verdict, "6 invariance", ok, 300, t,
          f"5 elements, worst invariant {max(inv):.2e} <= 1e-3, weakest Moyal control {min(ctrl):.2e} > 1e-3")


@pytest.mark.parametrize("theta", [0.5, 1.0])
def test_c07_tracial_identity(verdict, theta):
    with Timer() as t:
        tr = trace_defect(PAN[0], PAN[1], DeformationProfile.tracial_profile(theta), G).value
        un = trace_defect(PAN[0], PAN[1], DeformationProfile.unit_profile(theta), G).value
    ok = tr <= 1e-4 and un > 1e-2
    check(verdict, f"7 tracial identity (theta={theta})", ok, 120, t,
          f"tracial {tr:.2e} <= 1e-4, unit profile {un:.2e} > 1e-2")


def test_c08_star_exponential_ode(verdict):
    with Timer() as t:
        orders = {n: ode_residual(X, 0.5, 0.5).order for n, X in (("H", H), ("E", E), ("F", F))}
    ok = all(abs(o - 2) <= 0.2 for o in orders.values())
    check(verdict, "8 star-exponential ODE", ok, 60, t,
          "orders " + ", ".join(f"{n}={o:.3f}" for n, o in orders.items()) + " (2 +- 0.2)")


def test_c09_bch(verdict):
    with Timer() as t:
        rep = run_scenario(ScenarioConfig(suite="bch", theta_list=(0.2, 0.5), seed=11))
    rand = max(r.value for r in rep.records if r.name == "bch.random_pairs")
    comm = max(r.value for r in rep.records if r.name == "bch.commuting")
    ok = rand <= 1e-2 and comm <= 1e-3
    check(verdict, "9 BCH", ok, 600, t,
          f"20 random pairs x theta (0.2, 0.5) worst {rand:.2e} <= 1e-2, commuting {comm:.2e} <= 1e-3")


def test_c10_semiclassical(verdict):
    thetas = [0.4, 0.2, 0.1, 0.05]
    with Timer() as t:
        diffs, pberr = semiclassical_series(PAN[0], PAN[1], thetas, G)
    orders = [math.log2(diffs[k] / diffs[k + 1]) for k in range(3)]
    ok = min(orders) >= 1 and all(b < a_ for a_, b in zip(pberr, pberr[1:]))
    check(verdict, "10 semiclassical limit", ok, 300, t,
          "orders " + ", ".join(f"{o:.3f}" for o in orders) + " (>= 1); Poisson errors "
          + ", ".join(f"{e:.1e}" for e in pberr))


def test_c11_multiplier_seminorms(verdict):
    prof = DeformationProfile.tracial_profile(0.5)
    with Timer() as t:
        drift = {str(X.as_tuple()): seminorm_window_drift(X, prof)
                 for X in (0.5 * H, AlgebraElement(0.3, 0.2, -0.1))}
    worst = max(drift.values())
    ok = np.isfinite(worst) and worst <= 1e-2
    check(verdict, "11 multiplier seminorms", ok, 600, t,
          f"largest relative change over A 3->4->5: {worst:.2e} (<= 1e-2)")
