import math

import numpy as np
import pytest
import scipy.linalg as sla
from hypothesis import given, settings
from hypothesis import strategies as st

from starq.lie import (
    E,
    F,
    H,
    IDENTITY,
    ZERO,
    AlgebraElement,
    GroupElement,
    NonFiniteError,
    bch,
    bracket,
    group_exp,
    group_inv,
    group_log,
    group_mul,
    sinhc,
)

# Faithful 3x3 representation: bottom row (m, l, 1), diagonal (e^{2a}, e^{-2a}, 1).


def mat(g: GroupElement) -> np.ndarray:
    return np.array([[math.exp(2 * g.a), 0, 0], [0, math.exp(-2 * g.a), 0], [g.m, g.l, 1.0]])


def alg_mat(X: AlgebraElement) -> np.ndarray:
    return np.array([[2 * X.alpha, 0, 0], [0, -2 * X.alpha, 0], [X.gamma, X.beta, 0.0]])


def from_mat(M) -> GroupElement:
    return GroupElement(0.5 * math.log(M[0, 0]), M[2, 1], M[2, 0])


def from_alg_mat(M) -> AlgebraElement:
    return AlgebraElement(M[0, 0] / 2, M[2, 1], M[2, 0])


def gt(g):
    return np.array([g.a, g.l, g.m])


coord = st.floats(-2, 2, allow_nan=False)
small = st.floats(-1.5, 1.5, allow_nan=False)
groups = st.builds(GroupElement, coord, coord, coord)
algs = st.builds(AlgebraElement, small, small, small)
tiny_alpha = st.builds(
    AlgebraElement,
    st.one_of(st.floats(-1e-5, 1e-5), st.sampled_from([0.0, 1e-6, -1e-6, 1e-10])),
    small,
    small,
)


def close(x, y, tol=1e-12):
    x, y = np.asarray(x, float), np.asarray(y, float)
    return np.linalg.norm(x - y) <= tol * max(1.0, np.linalg.norm(y))


def test_sinhc_series_matches_direct():
    for x in (1e-5, 5e-5, 9.9e-5, 1e-4, 2e-4, 0.3):
        assert math.isclose(sinhc(x), math.sinh(x) / x, rel_tol=1e-14)
    assert sinhc(0.0) == 1.0


@given(groups, groups)
def test_product_matches_matrix_representation(g1, g2):
    assert close(mat(group_mul(g1, g2)), mat(g1) @ mat(g2))


@given(groups, groups, groups)
def test_associativity(g1, g2, g3):
    assert close(gt((g1 * g2) * g3), gt(g1 * (g2 * g3)))


@given(groups)
def test_identity_and_inverse(g):
    assert gt(g * IDENTITY).tolist() == gt(g).tolist()
    assert gt(IDENTITY * g).tolist() == gt(g).tolist()
    assert close(gt(g * group_inv(g)), [0, 0, 0])
    assert close(gt(group_inv(g) * g), [0, 0, 0])


@given(algs)
def test_exp_matches_matrix_exponential(X):
    assert close(mat(group_exp(X)), sla.expm(alg_mat(X)), 1e-11)


@given(st.one_of(algs, tiny_alpha))
def test_log_exp_roundtrip(X):
    assert close(group_log(group_exp(X)).as_tuple(), X.as_tuple())


@given(groups)
def test_exp_log_roundtrip(g):
    assert close(gt(group_exp(group_log(g))), gt(g))


@pytest.mark.filterwarnings("ignore:logm result may be inaccurate")
@given(groups)
def test_log_matches_matrix_logarithm(g):
    L = from_alg_mat(np.real(sla.logm(mat(g))))
    assert close(group_log(g).as_tuple(), L.as_tuple(), 1e-9)


@settings(max_examples=200)
@given(st.one_of(algs, tiny_alpha), st.one_of(algs, tiny_alpha))
def test_bch_closed_form(X, Y):
    assert close(bch(X, Y).as_tuple(), group_log(group_exp(X) * group_exp(Y)).as_tuple())


def test_bch_commuting_and_zero():
    assert close(bch(0.3 * H, 0.4 * H).as_tuple(), (0.7, 0, 0))
    X = AlgebraElement(0.2, -0.4, 0.9)
    assert close(bch(X, ZERO).as_tuple(), X.as_tuple())


@given(algs, algs)
def test_bracket_matches_matrix_commutator(X, Y):
    A, B = alg_mat(X), alg_mat(Y)
    assert close(bracket(X, Y).as_tuple(), from_alg_mat(A @ B - B @ A).as_tuple())


@given(algs, algs, algs)
def test_jacobi_and_antisymmetry(X, Y, Z):
    j = bracket(X, bracket(Y, Z)) + bracket(Y, bracket(Z, X)) + bracket(Z, bracket(X, Y))
    assert j.norm() < 1e-12
    assert (bracket(X, Y) + bracket(Y, X)).norm() == 0


def test_basis_brackets():
    assert bracket(H, E).as_tuple() == (0, 2, 0)
    assert bracket(H, F).as_tuple() == (0, 0, -2)
    assert bracket(E, F).as_tuple() == (0, 0, 0)


def test_nonfinite_inputs_rejected():
    with pytest.raises(ValueError):
        AlgebraElement(float("nan"), 0, 0)
    with pytest.raises(NonFiniteError):
        group_exp(AlgebraElement(800.0, 1.0, 1.0))
