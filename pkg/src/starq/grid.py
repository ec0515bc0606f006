"""Sampled fields on a rectangular (a, l) window.

Nodes are ``a_i = -A + i*da`` (``da = 2A/n_a``) and ``l_j = -L + j*dl``
(``dl = 2L/n_l``); the dual frequencies are ``xi_k = (k - n_l/2) * pi/L``,
covering ``[-Xi, Xi)`` with Nyquist frequency ``Xi = pi/dl``.  The partial
Fourier transform follows ``F f(a, xi) = int dl e^{-i xi l} f(a, l)`` with no
``1/2pi`` on the forward side.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Union

import numpy as np

from .orbit import AnalyticField

__all__ = [
    "Domain",
    "GridSpec",
    "SampledField",
    "SeminormIndex",
    "DEFAULT_GRID",
    "TAPER_WIDTH",
    "sample",
    "partial_fourier",
    "inverse_partial_fourier",
    "nudft_rows",
    "spectral_shift_a",
    "spectral_da",
    "fourier_interp_a",
    "taper",
    "fd_weights",
    "fd_derivative",
    "schwartz_seminorm",
    "l2_norm",
    "dump_field",
    "load_field",
]

TAPER_WIDTH = 0.15


class Domain(str, Enum):
    POSITION = "position"
    FREQUENCY = "frequency"


def _is_pow2(n: int) -> bool:
    return n > 0 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class GridSpec:
    a_window: float = 3.0
    l_window: float = 12.0
    n_a: int = 256
    n_l: int = 256

    def __post_init__(self) -> None:
        object.__setattr__(self, "a_window", float(self.a_window))
        object.__setattr__(self, "l_window", float(self.l_window))
        if self.a_window <= 0 or self.l_window <= 0:
            raise ValueError("window half-widths must be positive")
        if not (_is_pow2(self.n_a) and _is_pow2(self.n_l)):
            raise ValueError(f"grid sizes must be powers of two, got {self.n_a}x{self.n_l}")

    @property
    def da(self) -> float:
        return 2.0 * self.a_window / self.n_a

    @property
    def dl(self) -> float:
        return 2.0 * self.l_window / self.n_l

    @property
    def dxi(self) -> float:
        return math.pi / self.l_window

    @property
    def nyquist(self) -> float:
        return math.pi / self.dl

    @property
    def a(self) -> np.ndarray:
        return -self.a_window + self.da * np.arange(self.n_a)

    @property
    def l(self) -> np.ndarray:  # noqa: E743
        return -self.l_window + self.dl * np.arange(self.n_l)

    @property
    def xi(self) -> np.ndarray:
        return self.dxi * (np.arange(self.n_l) - self.n_l // 2)

    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        return np.meshgrid(self.a, self.l, indexing="ij")

    def with_window(self, a_window: float, n_a: int | None = None) -> GridSpec:
        return GridSpec(a_window, self.l_window, n_a or self.n_a, self.n_l)


DEFAULT_GRID = GridSpec()


@dataclass(frozen=True)
class SampledField:
    grid: GridSpec
    values: np.ndarray = field(repr=False)
    domain: Domain = Domain.POSITION

    def __post_init__(self) -> None:
        v = np.array(self.values, dtype=complex)
        if v.shape != (self.grid.n_a, self.grid.n_l):
            raise ValueError(f"values shape {v.shape} does not match grid")
        if not np.all(np.isfinite(v)):
            raise ValueError("sampled values must be finite")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "domain", Domain(self.domain))

    def replace(self, values: np.ndarray, domain: Domain | None = None) -> SampledField:
        return SampledField(self.grid, values, domain or self.domain)

    def __add__(self, other: SampledField) -> SampledField:
        _same(self, other)
        return self.replace(self.values + other.values)

    def __sub__(self, other: SampledField) -> SampledField:
        _same(self, other)
        return self.replace(self.values - other.values)

    def __mul__(self, c) -> SampledField:
        if isinstance(c, SampledField):
            _same(self, c)
            return self.replace(self.values * c.values)
        return self.replace(self.values * c)

    __rmul__ = __mul__


def _same(f: SampledField, h: SampledField) -> None:
    if f.grid != h.grid or f.domain != h.domain:
        raise ValueError("fields live on different grids or domains")


def sample(f: AnalyticField, grid: GridSpec = DEFAULT_GRID) -> SampledField:
    A, Lm = grid.mesh()
    with np.errstate(over="ignore", invalid="ignore"):
        v = np.asarray(f(A, Lm), dtype=complex)
    bad = ~np.isfinite(v)
    if bad.any():
        i, j = np.argwhere(bad)[0]
        raise ValueError(f"non-finite value of {f.name} at node a={A[i, j]}, l={Lm[i, j]}")
    return SampledField(grid, v, Domain.POSITION)


def _require(f: SampledField, domain: Domain) -> None:
    if f.domain != domain:
        raise ValueError(f"expected a {domain.value}-domain field, got {f.domain.value}")


def partial_fourier(f: SampledField) -> SampledField:
    _require(f, Domain.POSITION)
    g = f.grid
    out = g.dl * np.fft.fftshift(np.fft.fft(np.fft.ifftshift(f.values, axes=1), axis=1), axes=1)
    return SampledField(g, out, Domain.FREQUENCY)


def inverse_partial_fourier(f: SampledField) -> SampledField:
    _require(f, Domain.FREQUENCY)
    g = f.grid
    out = np.fft.fftshift(np.fft.ifft(np.fft.ifftshift(f.values, axes=1), axis=1), axes=1) / g.dl
    return SampledField(g, out, Domain.POSITION)


def nudft_rows(rows: np.ndarray, ell: np.ndarray, freqs: np.ndarray, sign: int = -1) -> np.ndarray:
    """Direct sums ``dl * sum_j rows[..., j] e^{sign i xi l_j}`` at arbitrary ``freqs``.

    Returns shape ``rows.shape[:-1] + freqs.shape``.  No interpolation: exact
    evaluation of the trapezoid rule at off-grid frequencies.
    """
    dl = ell[1] - ell[0]
    kern = np.exp(sign * 1j * np.multiply.outer(ell, np.ravel(freqs)))
    out = dl * (rows @ kern)
    return out.reshape(rows.shape[:-1] + np.shape(freqs))


def _ka(grid: GridSpec) -> np.ndarray:
    k = 2.0 * np.pi * np.fft.fftfreq(grid.n_a, grid.da)
    k[grid.n_a // 2] = 0.0
    return k


def spectral_shift_a(values: np.ndarray, grid: GridSpec, shift) -> np.ndarray:
    """Rows evaluated at ``a + shift`` by Fourier interpolation along a.

    ``shift`` is a scalar or an array broadcasting against the column axis
    (one shift per column).  Fields must decay at the a-window edges.
    """
    k = _ka(grid)[:, None]
    spec = np.fft.fft(values, axis=0)
    return np.fft.ifft(spec * np.exp(1j * k * np.asarray(shift)), axis=0)


def spectral_da(values: np.ndarray, grid: GridSpec) -> np.ndarray:
    k = _ka(grid)[:, None]
    return np.fft.ifft(1j * k * np.fft.fft(values, axis=0), axis=0)


def taper(x, half_width: float, rel_width: float = TAPER_WIDTH) -> np.ndarray:
    """Cosine (Tukey) cutoff: 1 on ``|x| <= W(1-rel)``, cosine roll-off to 0 at ``W``."""
    x = np.abs(np.asarray(x, float))
    flat = half_width * (1.0 - rel_width)
    ramp = half_width - flat
    out = np.ones_like(x)
    mid = (x > flat) & (x < half_width)
    out[mid] = 0.5 * (1.0 + np.cos(np.pi * (x[mid] - flat) / ramp))
    out[x >= half_width] = 0.0
    return out


def fd_weights(order: int) -> tuple[int, np.ndarray]:
    """Central stencil of 4th-order accuracy for the ``order``-th derivative."""
    if order == 0:
        return 0, np.array([1.0])
    w = (order + 1) // 2 + 1
    offs = np.arange(-w, w + 1, dtype=float)
    V = np.vander(offs, increasing=True).T
    rhs = np.zeros(len(offs))
    rhs[order] = math.factorial(order)
    return w, np.linalg.solve(V, rhs)


def fd_derivative(values: np.ndarray, h: float, order: int, axis: int) -> np.ndarray:
    """Derivative along ``axis`` on interior nodes only (``w`` nodes trimmed each side)."""
    w, c = fd_weights(order)
    if order == 0:
        return values
    n = values.shape[axis]
    if n < 2 * w + 1:
        raise ValueError(f"grid too small for derivative order {order}")
    v = np.moveaxis(values, axis, 0)
    out = sum(ci * v[i: n - 2 * w + i] for i, ci in enumerate(c)) / h**order
    return np.moveaxis(out, 0, axis)


@dataclass(frozen=True)
class SeminormIndex:
    k: int = 0
    p: int = 0
    q: int = 0
    n: int = 0

    def __post_init__(self) -> None:
        if min(self.k, self.p, self.q, self.n) < 0:
            raise ValueError("seminorm indices are non-negative")

    @property
    def total(self) -> int:
        return self.k + self.p + self.q + self.n


def schwartz_seminorm(f: SampledField, idx: SeminormIndex) -> float:
    """sup |sinh(2a)^k / cosh(2a)^p  l^q  d_a^p d_l^n f| over interior nodes."""
    _require(f, Domain.POSITION)
    g = f.grid
    wa = fd_weights(idx.p)[0]
    wl = fd_weights(idx.n)[0]
    d = fd_derivative(f.values, g.da, idx.p, axis=0)
    d = fd_derivative(d, g.dl, idx.n, axis=1)
    a = g.a[wa: g.n_a - wa][:, None]
    l = g.l[wl: g.n_l - wl][None, :]  # noqa: E741
    weight = np.sinh(2.0 * a) ** idx.k / np.cosh(2.0 * a) ** idx.p * l**idx.q
    return float(np.max(np.abs(weight * d)))


def l2_norm(values: np.ndarray, grid: GridSpec) -> float:
    return float(np.sqrt(np.sum(np.abs(values) ** 2) * grid.da * grid.dl))


_HEADER_KEYS = ("a_window", "l_window", "n_a", "n_l", "domain")


def dump_field(f: SampledField, path: Union[str, Path, None] = None) -> str:
    """CSV: ``# key=value`` metadata lines, a column header, one line per node.

    Floats are written with ``repr`` so the loader reproduces them bit for bit.
    """
    g = f.grid
    buf = io.StringIO()
    for key in _HEADER_KEYS:
        val = f.domain.value if key == "domain" else getattr(g, key)
        buf.write(f"# {key}={val!r}\n" if key != "domain" else f"# {key}={val}\n")
    second = "l" if f.domain == Domain.POSITION else "xi"
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["a", second, "Re", "Im"])
    coord = g.l if f.domain == Domain.POSITION else g.xi
    for i, a in enumerate(g.a):
        for j, c in enumerate(coord):
            v = f.values[i, j]
            w.writerow([repr(float(a)), repr(float(c)), repr(float(v.real)), repr(float(v.imag))])
    text = buf.getvalue()
    if path is not None:
        Path(path).write_text(text)
    return text


def load_field(source: Union[str, Path]) -> SampledField:
    """Inverse of :func:`dump_field`; accepts a path or the CSV text itself."""
    text = source if isinstance(source, str) and "\n" in source else Path(source).read_text()
    meta = {}
    lines = text.splitlines()
    body_start = 0
    for body_start, line in enumerate(lines):
        if not line.startswith("#"):
            break
        key, _, val = line[1:].strip().partition("=")
        meta[key] = val
    grid = GridSpec(float(meta["a_window"]), float(meta["l_window"]),
                    int(meta["n_a"]), int(meta["n_l"]))
    rows = list(csv.reader(lines[body_start + 1:]))
    if len(rows) != grid.n_a * grid.n_l:
        raise ValueError(f"expected {grid.n_a * grid.n_l} nodes, found {len(rows)}")
    vals = np.array([[float(r[2]), float(r[3])] for r in rows])
    # assign parts directly: re + 1j*im would not preserve signed zeros
    values = np.empty(len(rows), complex)
    values.real, values.imag = vals[:, 0], vals[:, 1]
    values = values.reshape(grid.n_a, grid.n_l)
    return SampledField(grid, values, Domain(meta["domain"]))


def fourier_interp_a(values: np.ndarray, grid: GridSpec, a_new) -> np.ndarray:
    """Rows at arbitrary ``a`` positions by trigonometric interpolation along a."""
    a_new = np.atleast_1d(np.asarray(a_new, float))
    spec = np.fft.fft(values, axis=0) / grid.n_a
    k = _ka(grid)
    basis = np.exp(1j * np.multiply.outer(a_new + grid.a_window, k))
    return basis @ spec
