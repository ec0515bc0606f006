"""Moyal product on the (a, l) chart and the moment-map multiplier operators.

The product is

    (f * h)(a, l) = 4/(pi theta)^2  int f(a+a1, l+l1) h(a+a2, l+l2) e^{-(4i/theta)(a1 l2 - a2 l1)}.

Writing ``f = int dxi1/2pi e^{i xi1 l} f^(a, xi1)`` and likewise for ``h``,
the ``l``-integrals collapse to deltas and

    (f * h)(a, l) = int dxi1 dxi2 / (2pi)^2  e^{i(xi1+xi2) l}
                    f^(a + theta xi2/4, xi1) h^(a - theta xi1/4, xi2),

which is what :func:`moyal_product` evaluates: the a-shifts are Fourier
interpolations, the remaining sums FFTs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .grid import (
    Domain,
    GridSpec,
    SampledField,
    inverse_partial_fourier,
    l2_norm,
    partial_fourier,
    spectral_da,
    spectral_shift_a,
)
from .lie import AlgebraElement, bracket, sinhc
from .orbit import AnalyticField

__all__ = [
    "BAND_BUDGET",
    "BandLimitError",
    "DeformationProfile",
    "log_cosh",
    "moyal_product",
    "moyal_quadrature",
    "moment_left_mul",
    "covariance_residual",
    "moyal_star_exp",
    "moyal_exp_apply",
]

BAND_BUDGET = 40.0
_SKIP = 1e-17


class BandLimitError(ValueError):
    """Frequencies needed by an operator exceed the representable band."""


def log_cosh(x):
    """log(cosh x) without overflow."""
    x = np.abs(np.asarray(x, float))
    return x + np.log1p(np.exp(-2.0 * x)) - math.log(2.0)


@dataclass(frozen=True)
class DeformationProfile:
    """Deformation parameter theta and the multiplier t -> P_theta(t).

    ``log_p(t)`` returns ``log P_theta(t)`` (vectorized); working with logs
    keeps ratios of large ``sqrt(cosh)`` values finite.  ``dlog_p0`` is
    ``P'(0)/P(0)``; when omitted it is taken by central difference.
    """

    theta: float
    log_p: Callable[[np.ndarray], np.ndarray]
    name: str = "custom"
    dlog_p0: Optional[float] = None
    tracial: bool = False

    def __post_init__(self) -> None:
        if not self.theta > 0:
            raise ValueError("theta must be positive")
        if not np.isfinite(self.log_p(np.array([0.0]))[0]):
            raise ValueError("P_theta(0) must be positive")

    @classmethod
    def tracial_profile(cls, theta: float) -> DeformationProfile:
        """P(t) = sqrt(cosh(theta t / 2)), the trace-preserving choice."""
        return cls(theta, lambda t: 0.5 * log_cosh(0.5 * theta * np.asarray(t, float)),
                   "tracial", 0.0, True)

    @classmethod
    def unit_profile(cls, theta: float) -> DeformationProfile:
        return cls(theta, lambda t: np.zeros(np.shape(t)), "unit", 0.0, False)

    @classmethod
    def from_function(cls, theta: float, p: Callable, name: str = "custom") -> DeformationProfile:
        return cls(theta, lambda t: np.log(p(np.asarray(t, float))), name)

    def P(self, t):
        return np.exp(self.log_p(np.asarray(t, float)))

    @property
    def p0(self) -> float:
        return float(self.P(np.array([0.0]))[0])

    @property
    def log_derivative0(self) -> float:
        """P'(0)/P(0)."""
        if self.dlog_p0 is not None:
            return self.dlog_p0
        h = 1e-6
        lp = self.log_p(np.array([h, -h]))
        return float((lp[0] - lp[1]) / (2 * h))

    def with_theta(self, theta: float) -> DeformationProfile:
        if self.name == "tracial":
            return self.tracial_profile(theta)
        if self.name == "unit":
            return self.unit_profile(theta)
        return DeformationProfile(theta, self.log_p, self.name, self.dlog_p0, self.tracial)


def _inv_rows(arr: np.ndarray) -> np.ndarray:
    # sum_k e^{i xi_k l_j} arr[:, k] (no normalization)
    n = arr.shape[1]
    return n * np.fft.fftshift(np.fft.ifft(np.fft.ifftshift(arr, axes=1), axis=1), axes=1)


def _check_grid(f: SampledField, h: SampledField) -> None:
    if f.grid != h.grid:
        raise ValueError("fields are sampled on different grids")
    for x in (f, h):
        if x.domain != Domain.POSITION:
            raise ValueError("Moyal product expects position-domain fields")


def moyal_product(f: SampledField, h: SampledField, theta: float) -> SampledField:
    _check_grid(f, h)
    g = f.grid
    xi = g.xi
    fhat = partial_fourier(f).values
    hhat = partial_fourier(h).values
    ka = 2.0 * np.pi * np.fft.fftfreq(g.n_a, g.da)
    ka[g.n_a // 2] = 0.0
    fspec = np.fft.fft(fhat, axis=0)
    hspec = np.fft.fft(hhat, axis=0)
    ell = g.l
    col = np.max(np.abs(hhat), axis=0)
    keep = np.nonzero(col > _SKIP * max(col.max(), 1e-300))[0]
    out = np.zeros((g.n_a, g.n_l), complex)
    # h^ shifted by -theta xi1 / 4, one shift per xi1 column
    back = np.exp(-1j * np.multiply.outer(ka, theta * xi / 4.0))
    for k2 in keep:
        fs = np.fft.ifft(fspec * np.exp(1j * ka * theta * xi[k2] / 4.0)[:, None], axis=0)
        hs = np.fft.ifft(hspec[:, k2][:, None] * back, axis=0)
        out += _inv_rows(fs * hs) * np.exp(1j * xi[k2] * ell)[None, :]
    out *= (g.dxi / (2.0 * np.pi)) ** 2
    return SampledField(g, out, Domain.POSITION)


def moyal_quadrature(f: AnalyticField, h: AnalyticField, theta: float, points: Sequence,
                     a_half: float = 3.0, n_a: int = 401, l_half: float = 10.0,
                     n_l: int = 641) -> np.ndarray:
    """Direct quadrature of the defining integral at given points.

    Independent of the FFT/shift machinery: the l1 and l2 integrals are
    trapezoid sums for each (a1, a2) node, then summed over (a1, a2).
    """
    s = np.linspace(-a_half, a_half, n_a)
    t = np.linspace(-l_half, l_half, n_l)
    ds, dt = s[1] - s[0], t[1] - t[0]
    kern = np.exp((4j / theta) * np.multiply.outer(t, s))  # [l1, a2]
    out = []
    for p in points:
        pa, pl = (p.a, p.l) if hasattr(p, "a") else p
        fa = f(pa + s[:, None], pl + t[None, :])  # [a1, l1]
        ha = h(pa + s[:, None], pl + t[None, :])  # [a2, l2]
        A = fa @ kern * dt  # [a1, a2]: sum_l1 f e^{+(4i/theta) a2 l1}
        B = ha @ kern.conj() * dt  # [a2, a1]: sum_l2 h e^{-(4i/theta) a1 l2}
        out.append(np.sum(A * B.T) * ds * ds)
    return 4.0 / (np.pi * theta) ** 2 * np.asarray(out)


def _band_check(g: GridSpec, theta: float) -> None:
    if theta * g.nyquist > BAND_BUDGET:
        raise BandLimitError(
            f"theta*Xi = {theta * g.nyquist:.1f} exceeds the budget {BAND_BUDGET}")


def moment_left_mul(X: AlgebraElement, f: SampledField, theta: float) -> SampledField:
    """lambda_X * f through the partial-Fourier multipliers.

    ``F(lambda_H * f) = (2i d_xi + (i theta/2) d_a) f^``, with ``2i d_xi f^``
    realized as the transform of ``2 l f``;
    ``F(lambda_E * f) = e^{-2a - theta xi/2} f^``;
    ``F(lambda_F * f) = -e^{2a + theta xi/2} f^``.
    """
    if f.domain != Domain.POSITION:
        raise ValueError("moment_left_mul expects a position-domain field")
    g = f.grid
    _band_check(g, theta)
    A, XI = np.meshgrid(g.a, g.xi, indexing="ij")
    fhat = partial_fourier(f).values
    acc = np.zeros_like(fhat)
    if X.alpha:
        lf = f.replace(2.0 * g.l[None, :] * f.values)
        acc += X.alpha * (partial_fourier(lf).values
                          + 0.5j * theta * spectral_da(fhat, g))
    if X.beta:
        acc += X.beta * np.exp(-2.0 * A - 0.5 * theta * XI) * fhat
    if X.gamma:
        acc -= X.gamma * np.exp(2.0 * A + 0.5 * theta * XI) * fhat
    return inverse_partial_fourier(SampledField(g, acc, Domain.FREQUENCY))


def covariance_residual(X: AlgebraElement, Y: AlgebraElement, f: SampledField,
                        theta: float) -> float:
    """|| [lambda_X, lambda_Y]_* f + i theta lambda_[X,Y] * f ||_2 / ||f||_2."""
    xy = moment_left_mul(X, moment_left_mul(Y, f, theta), theta)
    yx = moment_left_mul(Y, moment_left_mul(X, f, theta), theta)
    br = moment_left_mul(bracket(X, Y), f, theta)
    res = xy.values - yx.values + 1j * theta * br.values
    return l2_norm(res, f.grid) / l2_norm(f.values, f.grid)


def _phase_parts(X: AlgebraElement, t: float, theta: float):
    """Moyal star-exponential as e^{i omega l} c(a)."""
    omega = 2.0 * X.alpha * t / theta
    s = sinhc(X.alpha * t) * t  # sinh(alpha t)/alpha

    def c(a):
        a = np.asarray(a, float)
        return np.exp((1j / theta) * s * (X.beta * np.exp(-2.0 * a) - X.gamma * np.exp(2.0 * a)))

    return omega, c


def moyal_star_exp(X: AlgebraElement, t: float, theta: float) -> AnalyticField:
    """exp((i/theta)(2 l alpha t + (sinh(alpha t)/alpha)(beta e^{-2a} - gamma e^{2a})))."""
    omega, c = _phase_parts(X, t, theta)
    s = sinhc(X.alpha * t) * t

    def value(a, l):
        return c(a) * np.exp(1j * omega * np.asarray(l, float))

    def da(a, l):
        return value(a, l) * (1j / theta) * s * (-2.0 * X.beta * np.exp(-2.0 * np.asarray(a))
                                                 - 2.0 * X.gamma * np.exp(2.0 * np.asarray(a)))

    def dl(a, l):
        return 1j * omega * value(a, l)

    return AnalyticField(value, da, dl, name=f"E0({X.as_tuple()},t={t})")


def moyal_exp_apply(X: AlgebraElement, t: float, theta: float, f: SampledField) -> SampledField:
    """E0(tX) * f for Schwartz ``f``.

    With ``E0 = e^{i omega l} c(a)`` the product formula reduces to
    ``int dxi/2pi e^{i(omega + xi) l} c(a + theta xi/4) f^(a - theta omega/4, xi)``.
    """
    g = f.grid
    omega, c = _phase_parts(X, t, theta)
    fhat = partial_fourier(f).values
    if omega:
        fhat = spectral_shift_a(fhat, g, -theta * omega / 4.0)
    A, XI = np.meshgrid(g.a, g.xi, indexing="ij")
    with np.errstate(over="ignore", invalid="ignore"):
        mult = c(A + theta * XI / 4.0)
    mult = np.where(np.abs(fhat) > 0, mult, 0.0)
    prod = np.nan_to_num(mult * fhat)
    out = inverse_partial_fourier(SampledField(g, prod, Domain.FREQUENCY)).values
    return SampledField(g, out * np.exp(1j * omega * g.l)[None, :], Domain.POSITION)
