"""Regularized oscillatory integrals over M x M.

Computes

    I[F] = int da1 da2 dl1 dl2  exp((2i/theta)(sinh(2a2) l1 - sinh(2a1) l2)) F(a1, a2, l1, l2)

for amplitudes that are smooth but only polynomially bounded in
``r_i = sinh(2a_i)`` and ``l_i``, by integrating by parts against the four
operators that fix the phase.  In the chart ``r = sinh(2a)`` the a-operator
``1 - theta^2/(16 cosh^2 2a) d_a^2`` is the leading part of
``1 - (theta/(4 cosh 2a) d_a)^2 = 1 - (theta^2/4) d_r^2``; the exact expansion in
the a-chart is

    1 - theta^2/(16 cosh^2 2a) (d_a^2 - 2 tanh(2a) d_a),

so the bounded-coefficient operator ``D`` contains powers of ``d_l`` and of
``(1/cosh 2a) d_a`` as well as the first-order ``tanh`` correction above.
Working in ``(r, l)`` the integral reads

    int dr dl e^{(2i/theta)(r2 l1 - r1 l2)} G,   G = F / (4 sqrt(1+r1^2) sqrt(1+r2^2)),

and the regularized amplitude is

    (1+l2^2)^{-p2} (1 - theta^2/4 d_r1^2)^{p2} (1+l1^2)^{-p1} (1 - theta^2/4 d_r2^2)^{p1}
    (1+r1^2)^{-k1} (1 - theta^2/4 d_l2^2)^{k1} (1+r2^2)^{-k2} (1 - theta^2/4 d_l1^2)^{k2} G.

Each operator leaves the phase invariant and is symmetric for Lebesgue
measure, so the value does not depend on the orders.  Derivatives are taken
symbolically (sympy) and the result integrated with a tapered trapezoid rule.

Amplitudes that factor as ``sum_k u_k(a1, l2) v_k(a2, l1)`` (see
:class:`PairAmplitude`) split into products of two-dimensional integrals
because the phase and all four operators respect that pairing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np
import sympy as sp

from .grid import taper

__all__ = [
    "a1", "a2", "l1", "l2", "a", "l",
    "PairAmplitude",
    "OscResult",
    "osc_integral",
    "pair_integral",
    "MAX_ORDER",
]

a1, a2, l1, l2 = sp.symbols("a1 a2 l1 l2", real=True)
a, l = sp.symbols("a l", real=True)  # noqa: E741
_r, _s = sp.symbols("r s", real=True)
_r1, _r2 = sp.symbols("r1 r2", real=True)

MAX_ORDER = 4
Orders = tuple[int, int, int, int]


@dataclass(frozen=True)
class PairAmplitude:
    """F = sum_k u_k(a1, l2) * v_k(a2, l1), each factor a sympy expression.

    Factors are written in the generic symbols ``a`` and ``l`` of this module.
    """

    terms: tuple[tuple[sp.Expr, sp.Expr], ...]

    def __init__(self, terms: Sequence[tuple]):
        object.__setattr__(self, "terms", tuple((sp.sympify(u), sp.sympify(v)) for u, v in terms))

    def full_expr(self) -> sp.Expr:
        return sp.Add(*[
            u.subs({a: a1, l: l2}, simultaneous=True) * v.subs({a: a2, l: l1}, simultaneous=True)
            for u, v in self.terms
        ])


@dataclass
class OscResult:
    value: complex
    converged: bool
    orders: Orders
    window_change: float
    history: list = field(default_factory=list)

    def __complex__(self) -> complex:
        return complex(self.value)


def _op_power(expr, var, theta, power):
    """(1 - theta^2/4 d_var^2)^power applied to expr."""
    c = -(theta**2) / 4
    out = 0
    for j in range(power + 1):
        out += math.comb(power, j) * c**j * (sp.diff(expr, var, 2 * j) if j else expr)
    return out


def _regularize_pair(g_expr, theta: float, k: int, p: int):
    """Regularized 2D amplitude in (r, s=l) for the pair with phase +-(2/theta) r s."""
    h = _op_power(g_expr, _s, theta, k) / (1 + _r**2) ** k
    return _op_power(h, _r, theta, p) / (1 + _s**2) ** p


def _lambdify(expr, args):
    fn = sp.lambdify(args, expr, modules="numpy", cse=True)

    def call(*xs):
        out = fn(*xs)
        return np.broadcast_to(np.asarray(out, dtype=complex), np.broadcast(*xs).shape)

    return call


def _step(theta: float, window: float, band: float) -> float:
    return math.pi / ((2.0 / theta) * window + band)


def _pair_quadrature(fn, sign: int, theta: float, window: float, band: float,
                     tapered: bool) -> complex:
    h = _step(theta, window, band)
    n = int(math.ceil(window / h))
    x = h * np.arange(-n, n + 1)
    w = taper(x, window) if tapered else np.ones_like(x)
    total = 0.0 + 0.0j
    chunk = max(1, 2_000_000 // len(x))
    for start in range(0, len(x), chunk):
        rr = x[start:start + chunk][:, None]
        ss = x[None, :]
        vals = fn(rr, ss) * np.exp(sign * 2j / theta * rr * ss)
        total += np.sum(vals * w[start:start + chunk][:, None] * w[None, :])
    return complex(total * h * h)


def pair_integral(u, sign: int, theta: float, k: int = 2, p: int = 2, *,
                  window: float = 20.0, band: float = 8.0, regularize: bool = True,
                  tapered: bool = True) -> complex:
    """int da dl exp(sign (2i/theta) sinh(2a) l) u(a, l), u a sympy expression in ``a, l``.

    The (a1, l2) factor of the four-variable phase carries ``sign = -1`` and
    the (a2, l1) factor ``sign = +1``.
    """
    g = sp.sympify(u).subs({a: sp.asinh(_r) / 2, l: _s}, simultaneous=True) / (
        2 * sp.sqrt(1 + _r**2))
    expr = _regularize_pair(g, theta, k, p) if regularize else g
    fn = _lambdify(expr, (_r, _s))
    return _pair_quadrature(fn, sign, theta, window, band, tapered)


def _four_dim(F, theta: float, orders: Orders, window: float, band: float,
              regularize: bool, tapered: bool) -> complex:
    k1, k2, p1, p2 = orders
    G = sp.sympify(F).subs({a1: sp.asinh(_r1) / 2, a2: sp.asinh(_r2) / 2},
                           simultaneous=True) / (4 * sp.sqrt(1 + _r1**2) * sp.sqrt(1 + _r2**2))
    if regularize:
        G = _op_power(G, l2, theta, k1) / (1 + _r1**2) ** k1
        G = _op_power(G, l1, theta, k2) / (1 + _r2**2) ** k2
        G = _op_power(G, _r2, theta, p1) / (1 + l1**2) ** p1
        G = _op_power(G, _r1, theta, p2) / (1 + l2**2) ** p2
    fn = _lambdify(G, (_r1, _r2, l1, l2))
    h = _step(theta, window, band)
    n = int(math.ceil(window / h))
    x = h * np.arange(-n, n + 1)
    w = taper(x, window) if tapered else np.ones_like(x)
    R2, L1, L2 = np.meshgrid(x, x, x, indexing="ij")
    W3 = w[:, None, None] * w[None, :, None] * w[None, None, :]
    total = 0.0 + 0.0j
    for i, r1v in enumerate(x):
        phase = np.exp(2j / theta * (R2 * L1 - r1v * L2))
        total += w[i] * np.sum(fn(r1v, R2, L1, L2) * phase * W3)
    return complex(total * h**4)


Amplitude = Union[PairAmplitude, sp.Expr]


def _evaluate(F: Amplitude, theta: float, orders: Orders, window: float, band: float,
              regularize: bool, tapered: bool) -> complex:
    k1, k2, p1, p2 = orders
    if isinstance(F, PairAmplitude):
        total = 0.0 + 0.0j
        for u, v in F.terms:
            if u == 0 or v == 0:
                continue
            iu = pair_integral(u, -1, theta, k1, p2, window=window, band=band,
                               regularize=regularize, tapered=tapered)
            iv = pair_integral(v, +1, theta, k2, p1, window=window, band=band,
                               regularize=regularize, tapered=tapered)
            total += iu * iv
        return total
    if sp.sympify(F) == 0:
        return 0.0j
    return _four_dim(F, theta, orders, window, band, regularize, tapered)


def osc_integral(F: Amplitude, theta: float, orders: Orders = (2, 2, 2, 2), *,
                 window: float | None = None, band: float = 8.0, tol: float = 1e-6,
                 regularize: bool = True, tapered: bool = True, escalate: bool = True,
                 growth: float | None = None) -> OscResult:
    """Regularized value of the oscillatory integral of ``F``.

    ``window`` is the common half-width in ``r`` and ``l``; the result is
    recomputed on a window grown by ``growth`` (2 for pair amplitudes, 1.25 for
    general four-variable amplitudes) and flagged non-converged when the two
    differ by more than ``tol`` relative.  With ``escalate`` the orders are
    raised by one (up to 4) until the flag clears.
    """
    if theta <= 0:
        raise ValueError("theta must be positive")
    pair = isinstance(F, PairAmplitude)
    if window is None:
        window = 20.0 if pair else 5.5
    if growth is None:
        growth = 2.0 if pair else 1.25
    orders = tuple(int(o) for o in orders)
    history = []
    while True:
        v1 = _evaluate(F, theta, orders, window, band, regularize, tapered)
        v2 = _evaluate(F, theta, orders, growth * window, band, regularize, tapered)
        scale = max(abs(v2), 1e-300)
        change = abs(v2 - v1) / scale if abs(v2) > 0 else abs(v2 - v1)
        history.append((orders, v2, change))
        ok = change <= tol
        if ok or not escalate or not regularize or max(orders) >= MAX_ORDER:
            return OscResult(v2, ok, orders, change, history)
        orders = tuple(min(o + 1, MAX_ORDER) for o in orders)
