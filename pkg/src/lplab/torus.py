"""Trigonometric polynomials on the torus and the norm functionals used throughout.

All functionals use the normalized probability measure dx/(2*pi) on T, so the
constant function 1 has every norm equal to 1.  Samples live on the uniform grid
x_k = 2*pi*k/M and every integral is the trapezoid sum over that grid, which is
exact for trigonometric polynomials of degree < M/2 when the integrand is itself a
polynomial (p = 2) and spectrally accurate otherwise.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

__all__ = [
    "AliasingError",
    "TrigPoly",
    "TrigPoly2D",
    "GridSamples",
    "DEFAULT_OVERSAMPLING",
    "default_grid_size",
    "evaluate",
    "evaluate_2d",
    "forward",
    "lp_norm",
    "l2_norm_parseval",
    "weak_l1",
    "orlicz_phi",
    "llogl_norm",
    "zygmund_functional",
    "modulate",
]

DEFAULT_OVERSAMPLING = 8


class AliasingError(ValueError):
    """Raised when a grid is too coarse to represent a polynomial without aliasing."""


def _trim(lo: int, coeffs: np.ndarray) -> tuple[int, np.ndarray]:
    nz = np.flatnonzero(coeffs)
    if nz.size == 0:
        return 0, np.zeros(0, dtype=complex)
    return lo + int(nz[0]), coeffs[nz[0] : nz[-1] + 1]


@dataclass(frozen=True, eq=False)
class TrigPoly:
    """A trigonometric polynomial sum_n c_n e^{inx}, stored densely.

    ``coeffs[k]`` is the amplitude of frequency ``lo + k``.  Leading and trailing
    zeros are trimmed on construction, so ``freq_lo``/``freq_hi`` are the true
    support bounds; the zero polynomial has an empty coefficient array.
    """

    lo: int
    coeffs: np.ndarray = field(repr=False)

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=complex).ravel()
        lo, c = _trim(int(self.lo), c)
        c.setflags(write=False)
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "coeffs", c)

    # construction -------------------------------------------------------
    @classmethod
    def zero(cls) -> "TrigPoly":
        return cls(0, np.zeros(0, dtype=complex))

    @classmethod
    def monomial(cls, n: int, amplitude: complex = 1.0) -> "TrigPoly":
        return cls(n, np.array([amplitude], dtype=complex))

    @classmethod
    def from_dict(cls, coeffs: Mapping[int, complex]) -> "TrigPoly":
        items = {int(n): complex(c) for n, c in coeffs.items() if c != 0}
        if not items:
            return cls.zero()
        lo, hi = min(items), max(items)
        dense = np.zeros(hi - lo + 1, dtype=complex)
        for n, c in items.items():
            dense[n - lo] = c
        return cls(lo, dense)

    # inspection ---------------------------------------------------------
    @property
    def is_zero(self) -> bool:
        return self.coeffs.size == 0

    @property
    def freq_lo(self) -> int:
        return self.lo

    @property
    def freq_hi(self) -> int:
        return self.lo + self.coeffs.size - 1 if self.coeffs.size else 0

    @property
    def width(self) -> int:
        return self.coeffs.size

    @property
    def is_analytic(self) -> bool:
        """True when the spectrum lies in the non-negative integers."""
        return self.is_zero or self.freq_lo >= 0

    @property
    def frequencies(self) -> np.ndarray:
        return np.arange(self.lo, self.lo + self.coeffs.size)

    def coeff(self, n) -> complex | np.ndarray:
        """Coefficient(s) at integer frequency ``n`` (zero outside the support)."""
        n_arr = np.asarray(n)
        k = n_arr - self.lo
        inside = (k >= 0) & (k < self.coeffs.size)
        out = np.zeros(n_arr.shape, dtype=complex)
        out[inside] = self.coeffs[k[inside]]
        return complex(out) if out.ndim == 0 else out

    def __getitem__(self, n):
        return self.coeff(n)

    def as_dict(self) -> dict[int, complex]:
        return {int(self.lo + k): complex(c) for k, c in enumerate(self.coeffs) if c != 0}

    # arithmetic ---------------------------------------------------------
    def __add__(self, other: "TrigPoly") -> "TrigPoly":
        if self.is_zero:
            return other
        if other.is_zero:
            return self
        lo = min(self.freq_lo, other.freq_lo)
        hi = max(self.freq_hi, other.freq_hi)
        dense = np.zeros(hi - lo + 1, dtype=complex)
        dense[self.lo - lo : self.lo - lo + self.width] += self.coeffs
        dense[other.lo - lo : other.lo - lo + other.width] += other.coeffs
        return TrigPoly(lo, dense)

    def __neg__(self) -> "TrigPoly":
        return TrigPoly(self.lo, -self.coeffs)

    def __sub__(self, other: "TrigPoly") -> "TrigPoly":
        return self + (-other)

    def __mul__(self, scalar: complex) -> "TrigPoly":
        return TrigPoly(self.lo, self.coeffs * scalar)

    __rmul__ = __mul__

    def conj_reflect(self) -> "TrigPoly":
        """The polynomial conj(f(x)): coefficient at n becomes conj(c_{-n})."""
        return TrigPoly(-self.freq_hi, np.conj(self.coeffs[::-1]))

    # serialization ------------------------------------------------------
    def to_json(self) -> str:
        """JSON list of ``[frequency, real, imag]`` triples (non-zero terms only)."""
        return json.dumps([[n, c.real, c.imag] for n, c in self.as_dict().items()])

    @classmethod
    def from_json(cls, text: str) -> "TrigPoly":
        return cls.from_dict({int(n): complex(re, im) for n, re, im in json.loads(text)})


@dataclass(frozen=True, eq=False)
class TrigPoly2D:
    """A trigonometric polynomial on T^2; ``coeffs[a, b]`` sits at ``(lo[0]+a, lo[1]+b)``."""

    lo: tuple[int, int]
    coeffs: np.ndarray = field(repr=False)

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=complex)
        if c.ndim != 2:
            raise ValueError("TrigPoly2D needs a 2-D coefficient array")
        lo = (int(self.lo[0]), int(self.lo[1]))
        rows = np.flatnonzero(np.any(c != 0, axis=1))
        cols = np.flatnonzero(np.any(c != 0, axis=0))
        if rows.size == 0:
            lo, c = (0, 0), np.zeros((0, 0), dtype=complex)
        else:
            c = c[rows[0] : rows[-1] + 1, cols[0] : cols[-1] + 1]
            lo = (lo[0] + int(rows[0]), lo[1] + int(cols[0]))
        c.setflags(write=False)
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def outer(cls, f: TrigPoly, g: TrigPoly) -> "TrigPoly2D":
        """The product f(x) g(y)."""
        return cls((f.lo, g.lo), np.outer(f.coeffs, g.coeffs))

    @property
    def is_zero(self) -> bool:
        return self.coeffs.size == 0

    @property
    def freq_lo(self) -> tuple[int, int]:
        return self.lo

    @property
    def freq_hi(self) -> tuple[int, int]:
        if self.is_zero:
            return (0, 0)
        return (self.lo[0] + self.coeffs.shape[0] - 1, self.lo[1] + self.coeffs.shape[1] - 1)

    @property
    def is_analytic(self) -> bool:
        return self.is_zero or min(self.lo) >= 0

    def coeff(self, n1: int, n2: int) -> complex:
        a, b = n1 - self.lo[0], n2 - self.lo[1]
        if 0 <= a < self.coeffs.shape[0] and 0 <= b < self.coeffs.shape[1]:
            return complex(self.coeffs[a, b])
        return 0j

    def axis_poly(self, axis: int) -> TrigPoly:
        """Bounding 1-D support along ``axis`` as a TrigPoly of ones (coverage checks)."""
        lo, hi = self.freq_lo[axis], self.freq_hi[axis]
        return TrigPoly(lo, np.ones(hi - lo + 1))


@dataclass(frozen=True, eq=False)
class GridSamples:
    """Samples of a function on the uniform grid x_k = 2*pi*k/M (one axis per dimension)."""

    values: np.ndarray

    @property
    def grid_size(self) -> int | tuple[int, ...]:
        shape = np.shape(self.values)
        return shape[0] if len(shape) == 1 else shape

    @property
    def x(self) -> np.ndarray:
        m = np.shape(self.values)[0]
        return 2 * np.pi * np.arange(m) / m


def _abs(samples) -> np.ndarray:
    vals = samples.values if isinstance(samples, GridSamples) else samples
    a = np.abs(np.asarray(vals)).ravel()
    if a.size == 0:
        raise ValueError("empty sample set")
    return a


def _min_alias_free(lo: int, hi: int) -> int:
    return 2 * max(abs(lo), abs(hi)) + 1


def default_grid_size(poly: TrigPoly, oversampling: int = DEFAULT_OVERSAMPLING) -> int:
    """Smallest power of two that is at least ``oversampling`` times the support width
    and large enough to be alias free."""
    width = max(poly.width, 1)
    need = max(oversampling * width, _min_alias_free(poly.freq_lo, poly.freq_hi), 2)
    return 1 << (need - 1).bit_length()


def evaluate(poly: TrigPoly, M: int | None = None) -> GridSamples:
    """Sample ``poly`` at x_k = 2*pi*k/M via one inverse FFT."""
    if M is None:
        M = default_grid_size(poly)
    M = int(M)
    if M < _min_alias_free(poly.freq_lo, poly.freq_hi):
        raise AliasingError(
            f"grid size {M} aliases support [{poly.freq_lo}, {poly.freq_hi}]; "
            f"need at least {_min_alias_free(poly.freq_lo, poly.freq_hi)}"
        )
    spectrum = np.zeros(M, dtype=complex)
    if not poly.is_zero:
        spectrum[poly.frequencies % M] = poly.coeffs
    return GridSamples(np.fft.ifft(spectrum) * M)


def evaluate_2d(poly: TrigPoly2D, shape: tuple[int, int] | None = None) -> GridSamples:
    if shape is None:
        shape = tuple(
            default_grid_size(TrigPoly(poly.freq_lo[a], np.ones(poly.freq_hi[a] - poly.freq_lo[a] + 1)))
            for a in (0, 1)
        )
    for a in (0, 1):
        if shape[a] < _min_alias_free(poly.freq_lo[a], poly.freq_hi[a]):
            raise AliasingError(f"grid size {shape[a]} aliases axis {a} support")
    spectrum = np.zeros(shape, dtype=complex)
    if not poly.is_zero:
        r = np.arange(poly.lo[0], poly.lo[0] + poly.coeffs.shape[0]) % shape[0]
        c = np.arange(poly.lo[1], poly.lo[1] + poly.coeffs.shape[1]) % shape[1]
        spectrum[np.ix_(r, c)] = poly.coeffs
    return GridSamples(np.fft.ifft2(spectrum) * (shape[0] * shape[1]))


def forward(samples: GridSamples, lo: int, hi: int) -> TrigPoly:
    """Recover the coefficients on frequencies lo..hi from grid samples."""
    vals = np.asarray(samples.values)
    M = vals.shape[0]
    if M < _min_alias_free(lo, hi):
        raise AliasingError(f"grid size {M} cannot resolve [{lo}, {hi}]")
    spectrum = np.fft.fft(vals) / M
    return TrigPoly(lo, spectrum[np.arange(lo, hi + 1) % M])


def lp_norm(samples, p: float) -> float:
    """Normalized L^p norm (mean of |f|^p)^(1/p); ``p = inf`` gives the grid maximum."""
    if not p >= 1:
        raise ValueError(f"p must be >= 1, got {p}")
    a = _abs(samples)
    if math.isinf(p):
        return float(a.max())
    scale = a.max()
    if scale == 0:
        return 0.0
    # factor out the max so large p cannot overflow
    return float(scale * np.mean((a / scale) ** p) ** (1.0 / p))


def l2_norm_parseval(poly: TrigPoly | TrigPoly2D) -> float:
    return float(np.linalg.norm(poly.coeffs.ravel()))


def weak_l1(samples) -> float:
    """sup_t t * |{|f| > t}| with normalized measure, evaluated on the grid."""
    a = np.sort(_abs(samples))[::-1]
    k = np.arange(1, a.size + 1)
    return float(np.max(a * k) / a.size)


def orlicz_phi(t, r: float):
    """Young function t * (1 + log(1 + t))^r."""
    t = np.asarray(t, dtype=float)
    return t * (1.0 + np.log1p(t)) ** r


def _phi_inverse(y: float, r: float) -> float:
    lo, hi = 0.0, max(y, 1.0)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if orlicz_phi(mid, r) < y:
            lo = mid
        else:
            hi = mid
    return hi


def llogl_norm(samples, r: float, rtol: float = 1e-6, max_iter: int = 200) -> float:
    """Luxemburg norm of L log^r L: the t with mean Phi_r(|f|/t) = 1."""
    if not r > 0:
        raise ValueError("r must be positive")
    a = _abs(samples)
    top = float(a.max())
    if top == 0:
        return 0.0

    def excess(t):
        return float(np.mean(orlicz_phi(a / t, r))) - 1.0

    lo = top / _phi_inverse(float(a.size), r)
    hi = top * max(1.0 + math.log1p(top), 1.0 + math.log(2.0)) ** r
    # the mean is decreasing in t; widen until the root is bracketed
    while excess(lo) < 0:
        lo *= 0.5
    while excess(hi) > 0:
        hi *= 2.0
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if excess(mid) > 0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= rtol * hi:
            break
    return 0.5 * (lo + hi)


def zygmund_functional(samples) -> float:
    """1 + mean of |f| * log^(1/2)(e + |f|)."""
    a = _abs(samples)
    return float(1.0 + np.mean(a * np.sqrt(np.log(np.e + a))))


def modulate(poly: TrigPoly, shift: int) -> TrigPoly:
    """Multiply by e^{i shift x}."""
    if poly.is_zero:
        return poly
    return TrigPoly(poly.lo + int(shift), poly.coeffs)

