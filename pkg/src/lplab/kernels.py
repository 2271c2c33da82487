"""Closed-form test functions: Fejer and de la Vallee Poussin kernels, Dirichlet
blocks, the analytic extremal polynomials and seeded random polynomials."""

from __future__ import annotations

import numpy as np

from .torus import TrigPoly, modulate

__all__ = [
    "fejer",
    "de_la_vallee_poussin",
    "dirichlet_block",
    "extremal_fN",
    "extremal_fM",
    "random_analytic",
    "random_poly",
]


def fejer(n: int) -> TrigPoly:
    """K_n: coefficients 1 - |j|/(n+1) for |j| <= n."""
    if n < 0:
        raise ValueError("Fejer order must be non-negative")
    j = np.arange(-n, n + 1)
    return TrigPoly(-n, (n + 1 - np.abs(j)) / (n + 1))


def de_la_vallee_poussin(N: int) -> TrigPoly:
    """V_N = 2 K_{2N+1} - K_N.

    Coefficients are formed from integer numerators over N+1, so the plateau
    |n| <= N+1 is exactly 1.
    """
    if N < 1:
        raise ValueError("N must be at least 1")
    n = np.abs(np.arange(-(2 * N + 1), 2 * N + 2))
    numerator = (2 * N + 2 - n) - np.maximum(N + 1 - n, 0)
    return TrigPoly(-(2 * N + 1), numerator / (N + 1))


def dirichlet_block(a: int, b: int) -> TrigPoly:
    """sum_{n=a}^{b} e^{inx}."""
    if b < a:
        return TrigPoly.zero()
    return TrigPoly(a, np.ones(b - a + 1))


def extremal_fN(N: int) -> TrigPoly:
    """f_N = e^{i(2N+1)x} V_N: analytic, unit coefficients on [N, 3N+2]."""
    return modulate(de_la_vallee_poussin(N), 2 * N + 1)


def extremal_fM(M: int) -> TrigPoly:
    return extremal_fN(M)


def random_analytic(deg: int, seed: int) -> TrigPoly:
    """Complex Gaussian coefficients on 0..deg, scaled to unit L^2 norm."""
    if deg < 1:
        raise ValueError("degree must be at least 1")
    rng = np.random.default_rng(seed)
    c = rng.standard_normal(deg + 1) + 1j * rng.standard_normal(deg + 1)
    return TrigPoly(0, c / np.linalg.norm(c))


def random_poly(lo: int, hi: int, seed: int, real: bool = False) -> TrigPoly:
    """Unit-L^2 complex Gaussian coefficients on lo..hi.

    With ``real=True`` the support is symmetrized to [-hi', hi'] and the
    coefficients made conjugate-symmetric so the polynomial is real valued.
    """
    rng = np.random.default_rng(seed)
    if real:
        top = max(abs(lo), abs(hi))
        half = rng.standard_normal(top + 1) + 1j * rng.standard_normal(top + 1)
        half[0] = half[0].real
        c = np.concatenate((np.conj(half[:0:-1]), half))
        lo = -top
    else:
        c = rng.standard_normal(hi - lo + 1) + 1j * rng.standard_normal(hi - lo + 1)
    return TrigPoly(lo, c / np.linalg.norm(c))
