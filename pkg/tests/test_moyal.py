import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from starq.grid import GridSpec, l2_norm, sample
from starq.lie import E, F, H, AlgebraElement
from starq.moyal import (
    BandLimitError,
    DeformationProfile,
    covariance_residual,
    moment_left_mul,
    moyal_exp_apply,
    moyal_product,
    moyal_quadrature,
    moyal_star_exp,
)
from starq.orbit import OrbitPoint, gaussian, gaussian_panel, poisson

G = GridSpec()
PAN = gaussian_panel()


def rel(x, y):
    return l2_norm(x - y, G) / l2_norm(y, G)


def plain(a0=0.1, sa=0.45, l0=0.2, sl=1.3):
    """e^{-((a-a0)/sa)^2 - ((l-l0)/sl)^2}, written to accept complex l."""
    return lambda a, l: np.exp(-((a - a0) / sa) ** 2 - ((l - l0) / sl) ** 2)


@pytest.mark.parametrize("theta", [0.3, 1.0])
def test_product_matches_direct_quadrature(theta):
    f, h = PAN[0], PAN[1]
    fs, hs = sample(f, G), sample(h, G)
    prod = moyal_product(fs, hs, theta)
    nodes = [(100, 120), (140, 130), (128, 100), (110, 150)]
    pts = [OrbitPoint(G.a[i], G.l[j]) for i, j in nodes]
    ref = moyal_quadrature(f, h, theta, pts)
    got = np.array([prod.values[i, j] for i, j in nodes])
    assert np.max(np.abs(got - ref)) < 1e-8


def test_first_order_expansion():
    f, h = PAN[1], PAN[2]
    fs, hs = sample(f, G), sample(h, G)
    A, L = G.mesh()
    pb = poisson(f, h, (A, L))
    errs = []
    for theta in (0.1, 0.05):
        prod = moyal_product(fs, hs, theta).values
        errs.append(l2_norm(prod - fs.values * hs.values + 0.5j * theta * pb, G))
    assert math.log2(errs[0] / errs[1]) == pytest.approx(2.0, abs=0.2)


def test_associativity():
    f, h, k = (sample(p, G) for p in PAN[:3])
    theta = 0.5
    lhs = moyal_product(moyal_product(f, h, theta), k, theta).values
    rhs = moyal_product(f, moyal_product(h, k, theta), theta).values
    assert rel(lhs, rhs) < 1e-9


def test_conjugation_reverses_order():
    f, h = sample(PAN[0], G), sample(PAN[3], G)
    theta = 0.7
    lhs = np.conj(moyal_product(f, h, theta).values)
    rhs = moyal_product(h.replace(np.conj(h.values)), f.replace(np.conj(f.values)), theta).values
    assert rel(lhs, rhs) < 1e-12


@pytest.mark.parametrize("theta", [0.2, 0.8])
def test_moment_multipliers_closed_forms(theta):
    fn = plain()
    A, L = G.mesh()
    f = sample(gaussian(), G).replace(fn(A, L))
    # lambda_H * f = 2 l f + (i theta/2) d_a f
    fa = -2 * (A - 0.1) / 0.45**2 * fn(A, L)
    assert rel(moment_left_mul(H, f, theta).values, 2 * L * fn(A, L) + 0.5j * theta * fa) < 1e-10
    # lambda_E * f = e^{-2a} f(a, l + i theta/2); lambda_F * f = -e^{2a} f(a, l - i theta/2)
    assert rel(moment_left_mul(E, f, theta).values, np.exp(-2 * A) * fn(A, L + 0.5j * theta)) < 1e-10
    assert rel(moment_left_mul(F, f, theta).values, -np.exp(2 * A) * fn(A, L - 0.5j * theta)) < 1e-10


@pytest.mark.parametrize("theta", [0.1, 0.5, 1.0])
def test_covariance_all_basis_pairs(theta):
    f = sample(PAN[0], G)
    for X in (H, E, F):
        for Y in (H, E, F):
            assert covariance_residual(X, Y, f, theta) <= 1e-6


def test_band_budget_enforced():
    fine = GridSpec(3, 12, 64, 4096)
    f = sample(gaussian(), fine)
    with pytest.raises(BandLimitError):
        moment_left_mul(H, f, 0.5)


def test_moyal_star_exp_closed_form():
    theta = 0.5
    e0 = moyal_star_exp(H, 0.0, theta)
    assert np.allclose(e0(0.3, -0.4), 1.0)
    X = AlgebraElement(0.4, 0.3, -0.2)
    ex = moyal_star_exp(X, 0.6, theta)
    assert abs(abs(ex(0.2, 0.5)) - 1.0) < 1e-14
    # alpha -> 0 branch: exp((i/theta) t (beta e^{-2a} - gamma e^{2a}))
    ee = moyal_star_exp(E, 0.6, theta)
    assert np.allclose(ee(0.2, 0.5), np.exp(1j / theta * 0.6 * np.exp(-0.4)))


@settings(max_examples=8, deadline=None)
@given(st.floats(-0.6, 0.6), st.floats(-0.6, 0.6))
def test_moyal_exp_one_parameter_law(t, s):
    theta = 0.5
    X = AlgebraElement(0.3, 0.2, -0.1)
    f = sample(PAN[1], G)
    lhs = moyal_exp_apply(X, t, theta, moyal_exp_apply(X, s, theta, f)).values
    rhs = moyal_exp_apply(X, t + s, theta, f).values
    assert rel(lhs, rhs) < 1e-10
    assert rel(moyal_exp_apply(X, 0.0, theta, f).values, f.values) < 1e-14


def test_profiles():
    tr = DeformationProfile.tracial_profile(0.8)
    t = np.array([-2.0, 0.0, 1.5])
    assert np.allclose(tr.P(t), np.sqrt(np.cosh(0.4 * t)))
    assert tr.p0 == 1.0 and tr.log_derivative0 == 0.0 and tr.tracial
    custom = DeformationProfile.from_function(0.8, lambda x: 2.0 + np.tanh(x))
    assert custom.log_derivative0 == pytest.approx(0.5, rel=1e-8)
    assert custom.with_theta(0.3).theta == 0.3
    assert DeformationProfile.unit_profile(1.0).with_theta(0.2).name == "unit"
    with pytest.raises(ValueError):
        DeformationProfile.tracial_profile(0.0)
