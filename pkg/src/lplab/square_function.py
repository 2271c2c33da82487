"""Littlewood-Paley square functions for a lacunary prefix, in one and two variables.

The sharp projection Delta_j keeps the frequencies with |n| < l_0 (j = 0) or
l_{j-1} <= |n| < l_j (j >= 1).  On a finite prefix only polynomials whose support
fits in |n| < l_J (J the last index) are accepted; anything wider would need
terms the prefix does not have.
"""

from __future__ import annotations

import io
import json
from concurrent.futures import Executor
from dataclasses import dataclass, field

import numpy as np

from .multipliers import SignVector, apply, randomized_sum
from .sequences import LacunarySequence
from .torus import (
    TrigPoly,
    TrigPoly2D,
    default_grid_size,
    evaluate,
    evaluate_2d,
)

__all__ = [
    "CoverageError",
    "SquareFunctionResult",
    "DominationReport",
    "block_index",
    "check_coverage",
    "block_projections",
    "block_samples",
    "square_function",
    "square_function_2d",
    "randomized_operator",
    "refinement_multiplicity",
    "domination_check",
]

ZERO_FLOOR = 1e-13


class CoverageError(ValueError):
    """The polynomial reaches frequencies beyond the last term of the prefix."""

    def __init__(self, needed: int, available: int, axis: int | None = None):
        where = "" if axis is None else f" on axis {axis}"
        super().__init__(
            f"support not covered{where}: need a last term of at least {needed}, prefix ends at {available}"
        )
        self.needed = needed
        self.available = available
        self.axis = axis


def block_index(seq: LacunarySequence, n) -> np.ndarray:
    """Index j of the sharp projection containing frequency n (len(seq) if outside)."""
    return np.searchsorted(np.asarray(seq.terms, dtype=np.int64), np.abs(np.asarray(n)), side="right")


def check_coverage(seq: LacunarySequence, f: TrigPoly, axis: int | None = None):
    if f.is_zero:
        return
    top = max(abs(f.freq_lo), abs(f.freq_hi))
    if top >= seq.max_term:
        raise CoverageError(top + 1, seq.max_term, axis)


def block_projections(seq: LacunarySequence, f: TrigPoly) -> dict[int, TrigPoly]:
    """Nonzero Delta_j(f), keyed by j in increasing order."""
    check_coverage(seq, f)
    if f.is_zero:
        return {}
    idx = block_index(seq, f.frequencies)
    out = {}
    for j in np.unique(idx):
        c = np.where(idx == j, f.coeffs, 0)
        if np.any(c):
            out[int(j)] = TrigPoly(f.lo, c)
    return out


def block_samples(seq: LacunarySequence, f: TrigPoly, M: int | None = None,
                  executor: Executor | None = None) -> tuple[list[int], np.ndarray]:
    """Grid samples of every nonzero Delta_j(f), stacked as rows on f's grid."""
    if M is None:
        M = default_grid_size(f)
    return _evaluate_blocks(block_projections(seq, f), M, executor)


def _evaluate_blocks(blocks: dict[int, TrigPoly], M: int, executor: Executor | None):
    mapper = executor.map if executor is not None else map
    rows = list(mapper(lambda g: evaluate(g, M).values, blocks.values()))
    if not rows:
        return [], np.zeros((0, M), dtype=complex)
    return list(blocks), np.vstack(rows)


def _sum_of_squares(rows) -> np.ndarray:
    # fixed index order keeps the result independent of how blocks were scheduled
    total = np.zeros(rows[0].shape)
    for r in rows:
        total += np.abs(r) ** 2
    return total


@dataclass(frozen=True, eq=False)
class SquareFunctionResult:
    samples: np.ndarray = field(repr=False)
    per_block_l2: np.ndarray
    grid_size: int | tuple[int, int]
    blocks_used: tuple

    def to_csv(self) -> str:
        """Rows (x, S(f)(x)) for 1-D results, (x, y, S(f)(x, y)) for 2-D."""
        buf = io.StringIO()
        if self.samples.ndim == 1:
            m = self.samples.size
            buf.write("x,S\n")
            for k, s in enumerate(self.samples):
                buf.write(f"{2 * np.pi * k / m:.17g},{s:.17g}\n")
        else:
            m1, m2 = self.samples.shape
            buf.write("x,y,S\n")
            for k1 in range(m1):
                for k2 in range(m2):
                    buf.write(f"{2 * np.pi * k1 / m1:.17g},{2 * np.pi * k2 / m2:.17g},{self.samples[k1, k2]:.17g}\n")
        return buf.getvalue()

    def summary(self) -> dict:
        return {
            "grid_size": self.grid_size,
            "blocks_used": [list(b) if isinstance(b, tuple) else b for b in self.blocks_used],
            "per_block_l2": [float(v) for v in self.per_block_l2.ravel()],
            "l2": float(np.sqrt(np.sum(self.per_block_l2**2))),
        }

    def to_json(self) -> str:
        return json.dumps(self.summary(), indent=2)


def square_function(seq: LacunarySequence, f: TrigPoly, M: int | None = None,
                    executor: Executor | None = None) -> SquareFunctionResult:
    """S(f)(x_k) = (sum_j |Delta_j f(x_k)|^2)^(1/2) on f's default grid."""
    if M is None:
        M = default_grid_size(f)
    blocks = block_projections(seq, f)
    used, rows = _evaluate_blocks(blocks, M, executor)
    per_block = np.zeros(len(seq))
    for j, g in blocks.items():
        per_block[j] = np.linalg.norm(g.coeffs)
    samples = np.sqrt(_sum_of_squares(rows)) if used else np.zeros(M)
    return SquareFunctionResult(samples, per_block, M, tuple(used))


def _axis_blocks(seq: LacunarySequence, lo: int, size: int) -> np.ndarray:
    return block_index(seq, np.arange(lo, lo + size))


def square_function_2d(seq1: LacunarySequence, seq2: LacunarySequence, f: TrigPoly2D,
                       shape: tuple[int, int] | None = None) -> SquareFunctionResult:
    """Two-parameter square function over the rectangles Delta_{j1} x Delta_{j2}."""
    for axis, seq in enumerate((seq1, seq2)):
        check_coverage(seq, f.axis_poly(axis), axis)
    if shape is None:
        shape = evaluate_2d(f).values.shape if not f.is_zero else (2, 2)
    per_block = np.zeros((len(seq1), len(seq2)))
    if f.is_zero:
        return SquareFunctionResult(np.zeros(shape), per_block, tuple(shape), ())
    b1 = _axis_blocks(seq1, f.lo[0], f.coeffs.shape[0])
    b2 = _axis_blocks(seq2, f.lo[1], f.coeffs.shape[1])
    used, rows = [], []
    for j1 in np.unique(b1):
        for j2 in np.unique(b2):
            mask = np.outer(b1 == j1, b2 == j2)
            c = np.where(mask, f.coeffs, 0)
            if not np.any(c):
                continue
            used.append((int(j1), int(j2)))
            per_block[j1, j2] = np.linalg.norm(c)
            rows.append(evaluate_2d(TrigPoly2D(f.lo, c), shape).values)
    return SquareFunctionResult(np.sqrt(_sum_of_squares(rows)), per_block, tuple(shape), tuple(used))


def randomized_operator(seq: LacunarySequence, signs: SignVector | np.ndarray, f: TrigPoly,
                        smoothed: bool = False) -> TrigPoly:
    """sum_j r_j Delta_j(f), with sharp or smoothed projections."""
    check_coverage(seq, f)
    return apply(randomized_sum(seq, signs, smoothed), f)


# --------------------------------------------------------------------------
# pointwise domination by a refinement


@dataclass(frozen=True)
class DominationReport:
    ratio: float
    cap: float
    multiplicity: int

    @property
    def within_cap(self) -> bool:
        # the cap is attained exactly by aligned equal-energy pieces; allow rounding
        return self.ratio <= self.cap * (1 + 1e-12)


def refinement_multiplicity(seq: LacunarySequence, refined: LacunarySequence) -> int:
    """Largest number of refined projections whose union is one original projection.

    Both sign sides sit in the same projection, so this is a count of refined
    intervals per original interval.
    """
    terms = set(refined.terms)
    missing = [t for t in seq.terms if t not in terms]
    if missing:
        raise ValueError(f"not a refinement: original terms {missing[:5]} are absent")
    # refined index of each original term, then differences between them
    pos = np.searchsorted(np.asarray(refined.terms), np.asarray(seq.terms))
    counts = np.diff(np.concatenate(([-1], pos)))
    return int(counts.max())


def domination_check(seq: LacunarySequence, refined: LacunarySequence, f: TrigPoly,
                     M: int | None = None) -> DominationReport:
    """max_x S_seq(f)(x) / S_refined(f)(x) against the Cauchy-Schwarz cap sqrt(m).

    Where both square functions fall below 1e-13 the ratio counts as 1.
    """
    if refined.max_term != seq.max_term:
        raise ValueError("the refinement must end at the same last term")
    m = refinement_multiplicity(seq, refined)
    if M is None:
        M = default_grid_size(f)
    num = square_function(seq, f, M).samples
    den = square_function(refined, f, M).samples
    both_small = (num < ZERO_FLOOR) & (den < ZERO_FLOOR)
    with np.errstate(divide="ignore", invalid="ignore"):
        q = np.where(both_small, 1.0, num / np.where(both_small, 1.0, den))
    ratio = float(np.max(q)) if q.size else 1.0
    report = DominationReport(ratio, float(np.sqrt(m)), m)
    if not report.within_cap:
        raise AssertionError(f"domination ratio {ratio} exceeds sqrt(m) = {report.cap}")
    return report
