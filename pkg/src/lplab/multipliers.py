"""Littlewood-Paley multiplier symbols on the integers.

Two families are provided: the sharp projections cutting frequencies to
|n| in [l_{j-1}, l_j - 1] and the trapezoidal smoothed projections that equal 1
on the j-th plateau and ramp linearly to 0 across the two neighbouring gaps.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .sequences import LacunarySequence
from .torus import TrigPoly

__all__ = [
    "SymbolTable",
    "SignVector",
    "sharp_symbol",
    "smoothed_symbol",
    "smoothed_indices",
    "apply",
    "mikhlin_constant",
    "randomized_sum",
    "draw_signs",
]


@dataclass(frozen=True, eq=False)
class SymbolTable:
    """Real symbol values on the integer window [window_lo, window_hi]; zero outside."""

    window_lo: int
    window_hi: int
    values: np.ndarray = field(repr=False)
    is_even_extension: bool = True
    sharp: bool = False
    degenerate: bool = False

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != (self.window_hi - self.window_lo + 1,):
            raise ValueError("symbol values do not match the window")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def frequencies(self) -> np.ndarray:
        return np.arange(self.window_lo, self.window_hi + 1)

    def __call__(self, n):
        n = np.asarray(n)
        k = n - self.window_lo
        inside = (k >= 0) & (k < self.values.size)
        out = np.zeros(n.shape)
        out[inside] = self.values[k[inside]]
        return out

    def sup(self) -> float:
        return float(np.max(np.abs(self.values))) if self.values.size else 0.0

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("n,value\n")
        for n, v in zip(self.frequencies, self.values):
            buf.write(f"{n},{float(v):.17g}\n")
        return buf.getvalue()


@dataclass(frozen=True, eq=False)
class SignVector:
    signs: np.ndarray
    seed: int

    def __post_init__(self):
        s = np.asarray(self.signs, dtype=np.int8)
        if not np.all(np.abs(s) == 1):
            raise ValueError("signs must be +1 or -1")
        s.setflags(write=False)
        object.__setattr__(self, "signs", s)

    def __len__(self) -> int:
        return self.signs.size

    @classmethod
    def from_seed(cls, length: int, seed: int) -> "SignVector":
        return cls(draw_signs(length, 1, seed)[0], seed)


def draw_signs(length: int, draws: int, seed: int) -> np.ndarray:
    """``draws`` x ``length`` array of fair signs from a counter-based generator."""
    rng = np.random.Generator(np.random.Philox(seed))
    return (2 * rng.integers(0, 2, size=(draws, length)) - 1).astype(np.int8)


def _check_index(seq: LacunarySequence, j: int, top: int):
    if not 0 <= j <= top:
        raise IndexError(f"projection index {j} outside 0..{top}")


def sharp_symbol(seq: LacunarySequence, j: int) -> SymbolTable:
    """Indicator of {-l_0+1..l_0-1} for j = 0, of +-[l_{j-1}, l_j - 1] for j >= 1."""
    _check_index(seq, j, len(seq) - 1)
    top = seq[j] - 1
    n = np.arange(-top, top + 1)
    inner = 0 if j == 0 else seq[j - 1]
    values = (np.abs(n) >= inner).astype(float)
    return SymbolTable(-top, top, values, sharp=True)


def _lower_neighbour(seq: LacunarySequence) -> int:
    """floor(l_0 / rho) in exact arithmetic, standing in for the missing l_{-1}."""
    a, b = min(zip(seq.terms, seq.terms[1:]), key=lambda ab: Fraction(ab[1], ab[0]))
    return (seq[0] * a) // b


def smoothed_symbol(seq: LacunarySequence, j: int) -> SymbolTable:
    """Even trapezoid: 1 on the j-th plateau, affine down to 0 at the outer neighbours."""
    if len(seq) < 2:
        raise ValueError("smoothed symbols need at least two terms")
    _check_index(seq, j, len(seq) - 2)
    if j == 0:
        a, b = None, None
        c, d = seq[0], seq[1]
    else:
        if j == 1:
            a = _lower_neighbour(seq)
            if a == 0:
                raise ValueError("first term is below the ratio; floor(l_0/rho) = 0 is degenerate")
        else:
            a = seq[j - 2]
        b, c, d = seq[j - 1], seq[j], seq[j + 1]
    n = np.arange(-d, d + 1)
    m = np.abs(n)
    values = np.zeros(n.size)
    values[m <= c] = 1.0
    down = (m > c) & (m < d)
    values[down] = (d - m[down]) / (d - c)
    if a is not None:
        values[m <= a] = 0.0
        up = (m > a) & (m < b)
        values[up] = (m[up] - a) / (b - a)
        degenerate = b - a == 1 or d - c == 1
    else:
        degenerate = d - c == 1
    return SymbolTable(-d, d, values, degenerate=degenerate)


def smoothed_indices(seq: LacunarySequence) -> range:
    """Indices j with a complete smoothed symbol on this prefix."""
    return range(len(seq) - 1)


def apply(symbol: SymbolTable, f: TrigPoly) -> TrigPoly:
    if f.is_zero:
        return f
    return TrigPoly(f.lo, f.coeffs * symbol(f.frequencies))


def mikhlin_constant(symbol: SymbolTable) -> float:
    """max over n of |n| |m(n+1) - m(n)|, scanning one step past each window edge."""
    padded = np.concatenate(([0.0], symbol.values, [0.0]))
    n = np.arange(symbol.window_lo - 1, symbol.window_hi + 1)
    return float(np.max(np.abs(n) * np.abs(np.diff(padded))))


def randomized_sum(seq: LacunarySequence, signs: SignVector | np.ndarray, smoothed: bool) -> SymbolTable:
    """sum_j r_j m_j over every projection index available on this prefix."""
    s = signs.signs if isinstance(signs, SignVector) else np.asarray(signs)
    indices = smoothed_indices(seq) if smoothed else range(len(seq))
    if s.size < len(indices):
        raise ValueError(f"need {len(indices)} signs, got {s.size}")
    top = seq[-1] if smoothed else seq[-1] - 1
    total = np.zeros(2 * top + 1)
    degenerate = False
    for j in indices:
        sym = smoothed_symbol(seq, j) if smoothed else sharp_symbol(seq, j)
        degenerate |= sym.degenerate
        off = sym.window_lo + top
        total[off : off + sym.values.size] += s[j] * sym.values
    return SymbolTable(-top, top, total, sharp=not smoothed, degenerate=degenerate)
