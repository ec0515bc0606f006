"""Closed-form group and Lie-algebra operations for ISO(1,1).

The group is parametrized globally by ``(a, l, m)`` with

    (a, l, m) . (a', l', m') = (a + a', e^{-2a'} l + l', e^{2a'} m + m')

and the Lie algebra is spanned by ``H, E, F`` with ``[H,E] = 2E``,
``[H,F] = -2F`` and ``[E,F] = 0``.  Every formula containing ``sinh(x)/x``
switches to its Taylor series for ``|x| < SERIES_EPS``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

__all__ = [
    "SERIES_EPS",
    "NonFiniteError",
    "AlgebraElement",
    "GroupElement",
    "H",
    "E",
    "F",
    "ZERO",
    "IDENTITY",
    "sinhc",
    "group_mul",
    "group_inv",
    "group_exp",
    "group_log",
    "bch",
    "bracket",
]

SERIES_EPS = 1e-4


class NonFiniteError(ArithmeticError):
    """Raised when a closed form overflows to a non-finite value."""


def _check(*values: float) -> None:
    for v in values:
        if not math.isfinite(v):
            raise NonFiniteError(f"non-finite result {values!r}")


def _exp(x: float) -> float:
    try:
        return math.exp(x)
    except OverflowError as exc:
        raise NonFiniteError(f"exp({x}) overflows") from exc


def sinhc(x: float) -> float:
    """sinh(x)/x, with the order-6 Taylor series near the origin."""
    if abs(x) < SERIES_EPS:
        x2 = x * x
        return 1.0 + x2 / 6.0 + x2 * x2 / 120.0 + x2 * x2 * x2 / 5040.0
    try:
        return math.sinh(x) / x
    except OverflowError as exc:
        raise NonFiniteError(f"sinh({x}) overflows") from exc


@dataclass(frozen=True)
class AlgebraElement:
    """X = alpha H + beta E + gamma F."""

    alpha: float = 0.0
    beta: float = 0.0
    gamma: float = 0.0

    def __post_init__(self) -> None:
        if not all(math.isfinite(c) for c in self.as_tuple()):
            raise ValueError(f"non-finite algebra coefficients {self.as_tuple()}")

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.alpha, self.beta, self.gamma)

    def __add__(self, other: AlgebraElement) -> AlgebraElement:
        return AlgebraElement(
            self.alpha + other.alpha, self.beta + other.beta, self.gamma + other.gamma
        )

    def __sub__(self, other: AlgebraElement) -> AlgebraElement:
        return self + (-1.0) * other

    def __rmul__(self, s: float) -> AlgebraElement:
        return AlgebraElement(s * self.alpha, s * self.beta, s * self.gamma)

    def __neg__(self) -> AlgebraElement:
        return (-1.0) * self

    def norm(self) -> float:
        return math.sqrt(self.alpha**2 + self.beta**2 + self.gamma**2)


@dataclass(frozen=True)
class GroupElement:
    a: float = 0.0
    l: float = 0.0  # noqa: E741
    m: float = 0.0

    def __post_init__(self) -> None:
        if not all(math.isfinite(c) for c in self.as_tuple()):
            raise NonFiniteError(f"non-finite group coordinates {self.as_tuple()}")

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.a, self.l, self.m)

    def __mul__(self, other: GroupElement) -> GroupElement:
        return group_mul(self, other)


H = AlgebraElement(1.0, 0.0, 0.0)
E = AlgebraElement(0.0, 1.0, 0.0)
F = AlgebraElement(0.0, 0.0, 1.0)
ZERO = AlgebraElement()
IDENTITY = GroupElement()


def group_mul(g1: GroupElement, g2: GroupElement) -> GroupElement:
    a = g1.a + g2.a
    l = _exp(-2.0 * g2.a) * g1.l + g2.l  # noqa: E741
    m = _exp(2.0 * g2.a) * g1.m + g2.m
    _check(a, l, m)
    return GroupElement(a, l, m)


def group_inv(g: GroupElement) -> GroupElement:
    l = -_exp(2.0 * g.a) * g.l  # noqa: E741
    m = -_exp(-2.0 * g.a) * g.m
    _check(l, m)
    return GroupElement(-g.a, l, m)


def group_exp(X: AlgebraElement, t: float = 1.0) -> GroupElement:
    """exp(tX) = (at, (b/a) e^{-at} sinh(at), (c/a) e^{at} sinh(at))."""
    x = X.alpha * t
    s = sinhc(x) * t
    l = X.beta * _exp(-x) * s  # noqa: E741
    m = X.gamma * _exp(x) * s
    _check(l, m)
    return GroupElement(x, l, m)


def group_log(g: GroupElement) -> AlgebraElement:
    inv = 1.0 / sinhc(g.a)
    beta = _exp(g.a) * g.l * inv
    gamma = _exp(-g.a) * g.m * inv
    _check(beta, gamma)
    return AlgebraElement(g.a, beta, gamma)


def bch(X: AlgebraElement, Y: AlgebraElement) -> AlgebraElement:
    """log(exp(X) exp(Y)) in closed form.

    Written with sinh(x)/x factors so that alpha_1, alpha_2 and
    alpha_1 + alpha_2 may each vanish.
    """
    a1, a2 = X.alpha, Y.alpha
    s = a1 + a2
    pref = 1.0 / sinhc(s)
    s1, s2 = sinhc(a1), sinhc(a2)
    beta = pref * (X.beta * _exp(-a2) * s1 + Y.beta * _exp(a1) * s2)
    gamma = pref * (X.gamma * _exp(a2) * s1 + Y.gamma * _exp(-a1) * s2)
    _check(beta, gamma)
    return AlgebraElement(s, beta, gamma)


def bracket(X: AlgebraElement, Y: AlgebraElement) -> AlgebraElement:
    return AlgebraElement(
        0.0,
        2.0 * (X.alpha * Y.beta - Y.alpha * X.beta),
        -2.0 * (X.alpha * Y.gamma - Y.alpha * X.gamma),
    )
