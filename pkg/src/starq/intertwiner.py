"""Intertwiners T_theta, T_theta^{-1} and the G-invariant product.

``T = P(0) F^{-1} o (phi^{-1})^* o P^{-1} o F`` with the warp
``phi(a, l) = (a, (2/theta) sinh(theta l / 2))`` acting on the frequency
variable.  Substituting ``xi = (2/theta) sinh(theta t/2)`` in the outer inverse
transform gives

    T f(a, l) = P(0)/2pi int dt cosh(theta t/2) P(t)^{-1} e^{i (2/theta) sinh(theta t/2) l} f^(a, t),

where ``f^(a, t) = int dxi e^{-i xi t} f(a, xi)`` is the forward partial
transform.  This is the same operator as the explicit double-integral kernel,
read with ``f(a, xi)`` meaning ``f`` evaluated at ``l = xi``.  Likewise

    T^{-1} f(a, l) = 1/(2pi P(0)) int dt e^{i t l} P(t) f^(a, (2/theta) sinh(theta t/2)).

The invariant product ``f *_{theta,P} h = T((T^{-1} f) *0 (T^{-1} h))`` is
evaluated directly from its kernel,

    4/(pi theta)^2 int da1 da2 cosh(2(a1-a2)) R(a, a1, a2) e^{(2i/theta) sinh(2(a1-a2)) l}
        f^(a1, (2/theta) sinh(2(a-a2))) h^(a2, (2/theta) sinh(2(a1-a)))

with ``R = P(4(a1-a)/theta) P(4(a-a2)/theta) / (P(4(a1-a2)/theta) P(0))``.  The
transforms at the sinh-warped frequencies are direct sums, not interpolated.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from .grid import (
    Domain,
    GridSpec,
    SampledField,
    fourier_interp_a,
    inverse_partial_fourier,
    nudft_rows,
    partial_fourier,
    sample,
)
from .lie import GroupElement
from .moyal import BandLimitError, DeformationProfile, log_cosh, moyal_quadrature
from .orbit import AnalyticField, OrbitPoint, coadjoint_act, pullback

__all__ = [
    "WarpMap",
    "apply_T",
    "apply_T_inv",
    "invariant_product",
    "trace_defect",
    "TraceDefect",
    "invariance_residual",
    "moyal_invariance_residual",
    "spectral_extent",
]

_NEGLIGIBLE = 1e-14


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("STARQ_THREADS", os.cpu_count() or 1)))
    except ValueError:
        return 1


@dataclass(frozen=True)
class WarpMap:
    theta: float

    def __call__(self, a, l):  # noqa: E741
        return a, 2.0 / self.theta * np.sinh(0.5 * self.theta * np.asarray(l, float))

    def inverse(self, a, l):  # noqa: E741
        return a, 2.0 / self.theta * np.arcsinh(0.5 * self.theta * np.asarray(l, float))

    def frequency(self, t):
        """Warped frequency (2/theta) sinh(theta t / 2)."""
        return 2.0 / self.theta * np.sinh(0.5 * self.theta * np.asarray(t, float))


def spectral_extent(values: np.ndarray, grid: GridSpec, rel: float = _NEGLIGIBLE) -> float:
    """Largest |xi| at which some row's transform exceeds ``rel`` of the global maximum."""
    fhat = np.abs(partial_fourier(SampledField(grid, values)).values)
    col = fhat.max(axis=0)
    big = np.nonzero(col > rel * max(col.max(), 1e-300))[0]
    if len(big) == 0:
        return 0.0
    return float(np.max(np.abs(grid.xi[big])))


def apply_T(prof: DeformationProfile, f: SampledField) -> SampledField:
    """T f on the grid of ``f``.

    The t-integral is a trapezoid sum whose integrand oscillates like
    ``e^{i s(t) l}``, i.e. at rate ``|l| cosh(theta t/2)`` in t, so the input
    transform is evaluated on a dual grid refined by a power of two covering
    ``cosh(theta t_max / 2)``; without it the output aliases near the l-edges.
    """
    if f.domain != Domain.POSITION:
        raise ValueError("apply_T expects a position-domain field")
    g = f.grid
    theta = prof.theta
    fhat = partial_fourier(f).values
    col = np.abs(fhat).max(axis=0)
    keep = col > _NEGLIGIBLE * max(col.max(), 1e-300)
    t_max = float(np.max(np.abs(g.xi[keep]))) + g.dxi if keep.any() else 0.0
    if WarpMap(theta).frequency(t_max - g.dxi) >= g.nyquist:
        raise BandLimitError(
            f"warped frequencies reach {WarpMap(theta).frequency(t_max - g.dxi):.1f} >= Nyquist {g.nyquist:.1f}")
    pad = 1 << max(0, int(np.ceil(np.log2(1.25 * np.cosh(0.5 * theta * t_max)))))
    step = g.dxi / pad
    t = step * np.arange(-int(np.ceil(t_max / step)), int(np.ceil(t_max / step)) + 1)
    coef = nudft_rows(f.values, g.l, t)
    logw = np.log(prof.p0) + log_cosh(0.5 * theta * t) - prof.log_p(t)
    kern = np.exp(1j * np.multiply.outer(WarpMap(theta).frequency(t), g.l))
    out = ((coef * np.exp(logw)[None, :]) @ kern) * step / (2.0 * np.pi)
    return SampledField(g, out, Domain.POSITION)


def apply_T_inv(prof: DeformationProfile, f: SampledField) -> SampledField:
    if f.domain != Domain.POSITION:
        raise ValueError("apply_T_inv expects a position-domain field")
    g = f.grid
    theta = prof.theta
    t = g.xi
    warped = WarpMap(theta).frequency(t)
    inband = np.abs(warped) < g.nyquist
    uhat = np.zeros((g.n_a, g.n_l), complex)
    uhat[:, inband] = nudft_rows(f.values, g.l, warped[inband])
    edge = np.abs(partial_fourier(f).values[:, [0]]).max()
    if edge > 1e-10 * max(np.abs(f.values).max(), 1e-300):
        raise BandLimitError("input is not band-limited inside the grid's Nyquist frequency")
    scale = np.exp(prof.log_p(t[inband]) - np.log(prof.p0))
    uhat[:, inband] *= scale[None, :]
    return inverse_partial_fourier(SampledField(g, uhat, Domain.FREQUENCY))


def _as_field(x, grid: Optional[GridSpec]) -> SampledField:
    if isinstance(x, SampledField):
        if x.domain != Domain.POSITION:
            raise ValueError("invariant_product expects position-domain fields")
        return x
    if isinstance(x, AnalyticField):
        if grid is None:
            raise ValueError("a grid is required to sample analytic fields")
        return sample(x, grid)
    raise TypeError(f"unsupported field type {type(x).__name__}")


def _band_radius(theta: float, xi_max: float, da: float, n: int) -> int:
    """Largest d with (2/theta) sinh(2 d da) <= xi_max."""
    d = int(np.floor(np.arcsinh(0.5 * theta * xi_max) / (2.0 * da)))
    return max(0, min(d, n - 1))


def _logP(prof: DeformationProfile, t):
    return prof.log_p(np.asarray(t, float))


def invariant_product(f, h, prof: DeformationProfile,
                      out_points: Optional[Iterable] = None,
                      grid: Optional[GridSpec] = None, refine: Optional[int] = None):
    """f *_{theta,P} h for Schwartz inputs.

    Returns a :class:`SampledField` on the input grid when ``out_points`` is
    None, otherwise a complex array of values at the given points (OrbitPoint
    or ``(a, l)`` pairs).  Star-exponentials are dispatched to
    :func:`starq.star_exp.multiplier_apply`.
    """
    from .star_exp import StarExponential, multiplier_apply

    if isinstance(f, StarExponential):
        return multiplier_apply(f, _as_field(h, grid), side="left", out_points=out_points)
    if isinstance(h, StarExponential):
        return multiplier_apply(h, _as_field(f, grid), side="right", out_points=out_points)
    grid = grid or getattr(f, "grid", None) or getattr(h, "grid", None)
    F = _as_field(f, grid)
    Hf = _as_field(h, F.grid)
    if F.grid != Hf.grid:
        raise ValueError("fields are sampled on different grids")
    if out_points is None:
        return _product_on_grid(F, Hf, prof, refine)
    return _product_at_points(F, Hf, prof, list(out_points))


def _auto_refine(theta: float, grid: GridSpec) -> int:
    # the kernel phase (2/theta) sinh(2(a1-a2)) l oscillates at rate ~(4/theta)|l| in a1-a2
    return max(1, int(np.ceil(8.0 * grid.l_window * grid.da / (np.pi * theta))))


def _product_on_grid(F: SampledField, Hf: SampledField, prof: DeformationProfile,
                     refine: Optional[int] = None) -> SampledField:
    g = F.grid
    theta = prof.theta
    r = refine or _auto_refine(theta, g)
    n = g.n_a
    da = g.da / r
    nf = n * r
    cap = min(g.nyquist * (1 - 1e-12), 1e300)
    D2 = _band_radius(theta, min(spectral_extent(F.values, g), cap), da, nf)
    D1 = _band_radius(theta, min(spectral_extent(Hf.values, g), cap), da, nf)
    d1 = np.arange(-D1, D1 + 1)
    d2 = np.arange(-D2, D2 + 1)
    a_fine = -g.a_window + da * np.arange(nf)
    fv = fourier_interp_a(F.values, g, a_fine) if r > 1 else F.values
    hv = fourier_interp_a(Hf.values, g, a_fine) if r > 1 else Hf.values
    fhat = nudft_rows(fv, g.l, 2.0 / theta * np.sinh(2.0 * d2 * da))  # [i1, d2]
    hhat = nudft_rows(hv, g.l, 2.0 / theta * np.sinh(2.0 * d1 * da))  # [i2, d1]
    fz = np.vstack([np.zeros((D1, len(d2))), fhat, np.zeros((D1, len(d2)))])
    hz = np.vstack([np.zeros((D2, len(d1))), hhat, np.zeros((D2, len(d1)))])
    m = np.add.outer(d1, d2)
    logK = (log_cosh(2.0 * m * da)
            + _logP(prof, 4.0 * d1 * da / theta)[:, None]
            + _logP(prof, 4.0 * d2 * da / theta)[None, :]
            - _logP(prof, 4.0 * m * da / theta) - np.log(prof.p0))
    K = np.exp(logK)
    ms = np.arange(-(D1 + D2), D1 + D2 + 1)
    phase = np.exp(2j / theta * np.multiply.outer(np.sinh(2.0 * ms * da), g.l))
    rows_f = np.abs(fv).max(axis=1)
    rows_h = np.abs(hv).max(axis=1)
    live_f = rows_f > _NEGLIGIBLE * rows_f.max()
    live_h = rows_h > _NEGLIGIBLE * rows_h.max()
    out = np.zeros((n, g.n_l), complex)

    def row(i: int) -> None:
        # a1 = a + d1 must carry f, a2 = a - d2 must carry h
        c = i * r
        if not (live_f[max(0, c - D1): c + D1 + 1].any() and live_h[max(0, c - D2): c + D2 + 1].any()):
            return
        fi = fz[c + d1 + D1]  # [d1, d2]
        hi = hz[c - d2 + D2].T  # [d1, d2]
        V = K * fi * hi
        U = np.zeros(len(ms), complex)
        for j in range(len(d1)):
            U[j: j + len(d2)] += V[j]
        out[i] = U @ phase

    with ThreadPoolExecutor(_threads()) as pool:
        list(pool.map(row, range(n)))
    out *= 4.0 / (np.pi * theta) ** 2 * da * da
    return SampledField(g, out, Domain.POSITION)


def _product_at_points(F: SampledField, Hf: SampledField, prof: DeformationProfile,
                       points: Sequence) -> np.ndarray:
    g = F.grid
    theta = prof.theta
    av = g.a
    res = np.empty(len(points), complex)
    for k, p in enumerate(points):
        pa, pl = (p.a, p.l) if isinstance(p, OrbitPoint) else p
        xi1 = 2.0 / theta * np.sinh(2.0 * (pa - av))  # indexed by a2
        xi2 = 2.0 / theta * np.sinh(2.0 * (av - pa))  # indexed by a1
        m1 = np.abs(xi1) < g.nyquist
        m2 = np.abs(xi2) < g.nyquist
        fh = np.zeros((g.n_a, g.n_a), complex)  # [a1, a2]
        hh = np.zeros((g.n_a, g.n_a), complex)  # [a2, a1]
        fh[:, m1] = nudft_rows(F.values, g.l, xi1[m1])
        hh[:, m2] = nudft_rows(Hf.values, g.l, xi2[m2])
        A1 = av[:, None]
        A2 = av[None, :]
        logK = (log_cosh(2.0 * (A1 - A2)) + _logP(prof, 4.0 * (A1 - pa) / theta)
                + _logP(prof, 4.0 * (pa - A2) / theta) - _logP(prof, 4.0 * (A1 - A2) / theta)
                - np.log(prof.p0))
        ph = np.exp(2j / theta * np.sinh(2.0 * (A1 - A2)) * pl)
        res[k] = np.sum(np.exp(logK) * ph * fh * hh.T)
    return res * 4.0 / (np.pi * theta) ** 2 * g.da * g.da


@dataclass(frozen=True)
class TraceDefect:
    value: float
    relative: bool

    def __float__(self) -> float:
        return self.value


def trace_defect(f, h, prof: DeformationProfile, grid: Optional[GridSpec] = None) -> TraceDefect:
    """|int f*h - int f h| / |int f h|; absolute when the denominator vanishes."""
    F = _as_field(f, grid or getattr(f, "grid", None))
    Hf = _as_field(h, F.grid)
    g = F.grid
    w = g.da * g.dl
    ref = np.sum(F.values * Hf.values) * w
    if not np.any(F.values) or not np.any(Hf.values):
        return TraceDefect(abs(ref), False)
    prod = invariant_product(F, Hf, prof)
    lhs = np.sum(prod.values) * w
    if abs(ref) < 1e-14:
        return TraceDefect(float(abs(lhs - ref)), False)
    return TraceDefect(float(abs(lhs - ref) / abs(ref)), True)


def _points(points) -> list:
    return [p if isinstance(p, OrbitPoint) else OrbitPoint(*p) for p in points]


def invariance_residual(g: GroupElement, f: AnalyticField, h: AnalyticField,
                        prof: DeformationProfile, points: Sequence, grid: GridSpec) -> float:
    """Relative l2 gap between (f*h)(g.p) and ((g^*f) * (g^*h))(p) over ``points``."""
    pts = _points(points)
    moved = [coadjoint_act(g, p) for p in pts]
    lhs = invariant_product(f, h, prof, out_points=moved, grid=grid)
    rhs = invariant_product(pullback(g, f), pullback(g, h), prof, out_points=pts, grid=grid)
    return float(np.linalg.norm(lhs - rhs) / np.linalg.norm(lhs))


def moyal_invariance_residual(g: GroupElement, f: AnalyticField, h: AnalyticField,
                              theta: float, points: Sequence, **quad) -> float:
    """Same gap for the Moyal product (a control: Moyal is covariant, not invariant)."""
    pts = _points(points)
    moved = [coadjoint_act(g, p) for p in pts]
    lhs = moyal_quadrature(f, h, theta, moved, **quad)
    rhs = moyal_quadrature(pullback(g, f), pullback(g, h), theta, pts, **quad)
    return float(np.linalg.norm(lhs - rhs) / np.linalg.norm(lhs))
