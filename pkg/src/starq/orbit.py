"""Geometry of the coadjoint orbit M (k = 1) in the global chart (a, l).

The group acts by

    (a_g, l_g, m_g) . (a, l) = (a_g + a, l + e^{-2a} l_g + e^{2a} m_g),

the moment map is ``lambda_H = 2l``, ``lambda_E = e^{-2a}``,
``lambda_F = -e^{2a}``, and the Poisson bracket dual to ``2 da ^ dl`` is
``{f, h} = (f_a h_l - f_l h_a) / 2``.  With this sign,
``{lambda_X, lambda_Y} = lambda_[X,Y]`` and ``X* f = {lambda_X, f}``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .lie import AlgebraElement, GroupElement, NonFiniteError

__all__ = [
    "OrbitPoint",
    "AnalyticField",
    "UnsupportedFieldError",
    "coadjoint_act",
    "moment",
    "moment_field",
    "poisson",
    "fundamental_field",
    "pullback",
    "constant",
    "gaussian",
    "reference_gaussian",
    "gaussian_panel",
]

Evaluator = Callable[[np.ndarray, np.ndarray], np.ndarray]


class UnsupportedFieldError(ValueError):
    """A field lacks the derivative data an operation needs."""


@dataclass(frozen=True)
class OrbitPoint:
    a: float
    l: float  # noqa: E741


@dataclass(frozen=True)
class AnalyticField:
    """Closed-form function on M with optional closed-form partials.

    Every callable takes broadcastable arrays ``(a, l)`` and returns complex
    values.  ``da``, ``dl`` are first partials; ``daa``, ``dal``, ``dll``
    second partials.
    """

    value: Evaluator
    da: Optional[Evaluator] = None
    dl: Optional[Evaluator] = None
    daa: Optional[Evaluator] = None
    dal: Optional[Evaluator] = None
    dll: Optional[Evaluator] = None
    name: str = "field"

    def __call__(self, a, l):  # noqa: E741
        a, l = np.broadcast_arrays(np.asarray(a, float), np.asarray(l, float))
        return np.asarray(self.value(a, l), dtype=complex) * np.ones(a.shape)

    def scaled(self, c: complex) -> AnalyticField:
        def sc(fn):
            return None if fn is None else (lambda a, l: c * fn(a, l))

        return AnalyticField(
            sc(self.value), sc(self.da), sc(self.dl), sc(self.daa), sc(self.dal),
            sc(self.dll), name=f"{c}*{self.name}",
        )


def coadjoint_act(g: GroupElement, p: OrbitPoint) -> OrbitPoint:
    a, l = _act_arrays(g, p.a, p.l)
    if not (np.isfinite(a) and np.isfinite(l)):
        raise NonFiniteError(f"action of {g} on {p} overflows")
    return OrbitPoint(float(a), float(l))


def _act_arrays(g: GroupElement, a, l):  # noqa: E741
    a = np.asarray(a, float)
    l = np.asarray(l, float)  # noqa: E741
    return g.a + a, l + np.exp(-2.0 * a) * g.l + np.exp(2.0 * a) * g.m


def moment(X: AlgebraElement, p):
    """lambda_X at a point; ``p`` may be an OrbitPoint or an ``(a, l)`` pair of arrays."""
    a, l = (p.a, p.l) if isinstance(p, OrbitPoint) else p
    a = np.asarray(a, float)
    l = np.asarray(l, float)  # noqa: E741
    out = X.alpha * 2.0 * l + X.beta * np.exp(-2.0 * a) - X.gamma * np.exp(2.0 * a)
    return float(out) if out.ndim == 0 else out


def moment_field(X: AlgebraElement) -> AnalyticField:
    al, be, ga = X.as_tuple()

    def val(a, l):
        return al * 2.0 * l + be * np.exp(-2.0 * a) - ga * np.exp(2.0 * a)

    def da(a, l):
        return -2.0 * be * np.exp(-2.0 * a) - 2.0 * ga * np.exp(2.0 * a)

    def daa(a, l):
        return 4.0 * be * np.exp(-2.0 * a) - 4.0 * ga * np.exp(2.0 * a)

    def dl(a, l):
        return np.full(np.broadcast(a, l).shape, 2.0 * al)

    def zero(a, l):
        return np.zeros(np.broadcast(a, l).shape)

    return AnalyticField(val, da, dl, daa, zero, zero, name=f"lambda{X.as_tuple()}")


def poisson(f: AnalyticField, h: AnalyticField, p):
    """{f, h} = (f_a h_l - f_l h_a) / 2 at ``p`` (OrbitPoint or array pair)."""
    if None in (f.da, f.dl, h.da, h.dl):
        raise UnsupportedFieldError("poisson bracket needs first partials of both fields")
    a, l = (p.a, p.l) if isinstance(p, OrbitPoint) else p
    a = np.asarray(a, float)
    l = np.asarray(l, float)  # noqa: E741
    out = 0.5 * (f.da(a, l) * h.dl(a, l) - f.dl(a, l) * h.da(a, l))
    return complex(out) if np.ndim(out) == 0 else np.asarray(out, complex)


def fundamental_field(X: AlgebraElement, p) -> tuple:
    """Components (d_a, d_l) of X* = -alpha d_a - (beta e^{-2a} + gamma e^{2a}) d_l."""
    a = p.a if isinstance(p, OrbitPoint) else np.asarray(p[0], float)
    ca = -X.alpha + 0.0 * a
    cl = -(X.beta * np.exp(-2.0 * a) + X.gamma * np.exp(2.0 * a))
    if np.ndim(cl) == 0:
        return float(ca), float(cl)
    return ca, cl


def pullback(g: GroupElement, f: AnalyticField) -> AnalyticField:
    """g* f = f(g . ), with partials by the chain rule.

    The action shifts ``l`` by ``u(a) = e^{-2a} l_g + e^{2a} m_g``.
    """

    def u1(a):
        return -2.0 * np.exp(-2.0 * a) * g.l + 2.0 * np.exp(2.0 * a) * g.m

    def u2(a):
        return 4.0 * np.exp(-2.0 * a) * g.l + 4.0 * np.exp(2.0 * a) * g.m

    def at(fn):
        return lambda a, l: fn(*_act_arrays(g, a, l))

    value = at(f.value)
    dl = at(f.dl) if f.dl is not None else None
    dll = at(f.dll) if f.dll is not None else None
    da = dal = daa = None
    if f.da is not None and f.dl is not None:
        def da(a, l):
            b, m = _act_arrays(g, a, l)
            return f.da(b, m) + u1(a) * f.dl(b, m)

    if f.dal is not None and f.dll is not None:
        def dal(a, l):
            b, m = _act_arrays(g, a, l)
            return f.dal(b, m) + u1(a) * f.dll(b, m)

    if None not in (f.daa, f.dal, f.dll, f.dl):
        def daa(a, l):
            b, m = _act_arrays(g, a, l)
            d = u1(a)
            return (f.daa(b, m) + 2.0 * d * f.dal(b, m) + d * d * f.dll(b, m)
                    + u2(a) * f.dl(b, m))

    return AnalyticField(value, da, dl, daa, dal, dll, name=f"pullback({g.as_tuple()},{f.name})")


def constant(c: complex = 1.0) -> AnalyticField:
    def val(a, l):
        return np.full(np.broadcast(a, l).shape, c, dtype=complex)

    def zero(a, l):
        return np.zeros(np.broadcast(a, l).shape, dtype=complex)

    return AnalyticField(val, zero, zero, zero, zero, zero, name=f"const({c})")


def gaussian(r0: float = 0.0, l0: float = 0.0, sr: float = 1.0, sl: float = 1.0,
             amp: complex = 1.0) -> AnalyticField:
    """amp * exp(-((sinh 2a - r0)/sr)^2 - ((l - l0)/sl)^2).

    Gaussian in the coordinates ``(r, l)`` with ``r = sinh(2a)``, hence a
    member of the Schwartz space of M.
    """

    def parts(a, l):
        r = np.sinh(2.0 * a)
        q = (r - r0) / sr
        p = (l - l0) / sl
        val = amp * np.exp(-(q * q) - p * p)
        return val, q, p, 2.0 * np.cosh(2.0 * a), 4.0 * r

    def value(a, l):
        return parts(a, l)[0]

    def da(a, l):
        v, q, _, r1, _ = parts(a, l)
        return v * (-2.0 * q * r1 / sr)

    def dl(a, l):
        v, _, p, _, _ = parts(a, l)
        return v * (-2.0 * p / sl)

    def daa(a, l):
        v, q, _, r1, r2 = parts(a, l)
        g = -2.0 * q * r1 / sr
        return v * (g * g - 2.0 * (r1 * r1 / sr**2 + q * r2 / sr))

    def dal(a, l):
        v, q, p, r1, _ = parts(a, l)
        return v * (2.0 * q * r1 / sr) * (2.0 * p / sl)

    def dll(a, l):
        v, _, p, _, _ = parts(a, l)
        return v * ((2.0 * p / sl) ** 2 - 2.0 / sl**2)

    return AnalyticField(value, da, dl, daa, dal, dll,
                         name=f"gaussian(r0={r0},l0={l0},sr={sr},sl={sl})")


def reference_gaussian() -> AnalyticField:
    """exp(-sinh^2(2a) - l^2)."""
    return gaussian()


def gaussian_panel() -> list[AnalyticField]:
    """Five fixed Schwartz test fields used by the product and multiplier checks."""
    return [
        gaussian(0.0, 0.0, 1.0, 1.5),
        gaussian(0.4, 0.5, 1.0, 1.5),
        gaussian(-0.3, -0.6, 0.8, 1.8),
        gaussian(0.2, 1.0, 1.2, 1.5),
        gaussian(-0.5, 0.3, 1.0, 2.0),
    ]
