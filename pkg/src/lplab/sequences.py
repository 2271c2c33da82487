"""Lacunary sequences: statistics and explicit constructions.

Finite prefixes stand in for infinite sequences; every statistic is computed over
the stored terms only.  The near-ratio construction evaluates powers in mpmath
at a precision that grows with the exponent and verifies its guarantees in exact
rational arithmetic.
"""

from __future__ import annotations

import bisect
import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Sequence

import mpmath

__all__ = [
    "LacunarySequence",
    "SequenceStats",
    "ratio",
    "sigma",
    "stats",
    "exact_lambda",
    "NearRatioParams",
    "near_ratio_params",
    "near_ratio_term",
    "first_exponent_at_least",
    "construct_near_ratio",
    "construct_near_ratio_from",
    "construct_near_ratio_upto",
    "refine",
    "sigma_block_example",
    "decompose_into_lacunary",
    "dyadic_block_counts",
]

BIGFLOAT_BITS = 200


@dataclass(frozen=True)
class LacunarySequence:
    terms: tuple[int, ...]
    label: str = ""

    def __post_init__(self):
        terms = tuple(int(t) for t in self.terms)
        if any(t < 1 for t in terms):
            raise ValueError("sequence terms must be positive integers")
        if any(b <= a for a, b in zip(terms, terms[1:])):
            raise ValueError("sequence terms must be strictly increasing")
        object.__setattr__(self, "terms", terms)

    def __len__(self) -> int:
        return len(self.terms)

    def __iter__(self) -> Iterator[int]:
        return iter(self.terms)

    def __getitem__(self, j):
        return self.terms[j]

    @property
    def max_term(self) -> int:
        return self.terms[-1]

    def to_json(self) -> str:
        return json.dumps(list(self.terms))

    @classmethod
    def from_json(cls, text: str, label: str = "") -> "LacunarySequence":
        data = json.loads(text)
        if isinstance(data, dict):
            return cls(tuple(data["terms"]), data.get("label", label))
        return cls(tuple(data), label)


@dataclass(frozen=True)
class SequenceStats:
    rho: float
    sigma: int
    num_terms: int
    max_term: int


def ratio(seq: LacunarySequence | Sequence[int]) -> float:
    """min_k terms[k+1]/terms[k]; +inf for a single term."""
    terms = list(seq)
    if not terms:
        raise ValueError("ratio of an empty sequence")
    if len(terms) == 1:
        return math.inf
    return min(b / a for a, b in zip(terms, terms[1:]))


def dyadic_block_counts(terms: Sequence[int]) -> dict[int, int]:
    """Number of terms in each closed block {2^(N-1), ..., 2^N}, N >= 1."""
    terms = sorted(terms)
    top = max(terms).bit_length() + 1
    out = {}
    for n in range(1, top + 1):
        lo, hi = 1 << (n - 1), 1 << n
        out[n] = bisect.bisect_right(terms, hi) - bisect.bisect_left(terms, lo)
    return out


def sigma(seq: LacunarySequence | Sequence[int]) -> int:
    """Largest number of terms in one closed dyadic block {2^(N-1), ..., 2^N}."""
    terms = list(seq)
    if not terms:
        raise ValueError("sigma of an empty sequence")
    return max(dyadic_block_counts(terms).values())


def stats(seq: LacunarySequence) -> SequenceStats:
    return SequenceStats(ratio(seq), sigma(seq), len(seq), seq.max_term)


# --------------------------------------------------------------------------
# near-ratio construction


def exact_lambda(lam) -> Fraction:
    """Interpret a user-supplied ratio target as an exact rational.

    Floats are read through their shortest decimal repr, so 1.05 means 21/20.
    """
    if isinstance(lam, Fraction):
        return lam
    if isinstance(lam, float):
        return Fraction(repr(lam))
    return Fraction(str(lam))


def _mpf(q: Fraction):
    return mpmath.mpf(q.numerator) / q.denominator


@dataclass(frozen=True)
class NearRatioParams:
    """The exact target ``lam`` and the first admissible exponent ``j0``.

    Terms are ceil(base^k) with base = lam^(7/4); ``base`` is recomputed at
    whatever precision a given power needs.
    """

    lam: Fraction
    j0: int

    @property
    def log2_base(self) -> float:
        return 1.75 * math.log2(float(self.lam))

    def bits_for(self, k: int) -> int:
        """Working precision that keeps ceil(base^k) exact."""
        return BIGFLOAT_BITS + int(k * self.log2_base) + 32

    def base(self):
        return _mpf(self.lam) ** (mpmath.mpf(7) / 4)


def _check_lambda(lam: Fraction):
    if lam <= 1:
        raise ValueError(f"lambda must exceed 1, got {float(lam)}")
    if lam**3 >= 2:
        raise ValueError(f"need lambda^3 < 2, got lambda^3 = {float(lam**3):.6g}")


def near_ratio_params(lam) -> NearRatioParams:
    q = exact_lambda(lam)
    _check_lambda(q)
    with mpmath.workprec(BIGFLOAT_BITS):
        lam_mp = _mpf(q)
        base = lam_mp ** (mpmath.mpf(7) / 4)
        target = lam_mp / base
        j = 1
        while True:
            t = base**j
            if t / (t + 1) >= target:
                break
            j += 1
    return NearRatioParams(q, j)


def near_ratio_term(params: NearRatioParams, k: int) -> int:
    """ceil(base^k) as an exact integer (k is the absolute exponent)."""
    with mpmath.workprec(params.bits_for(k)):
        return int(mpmath.ceil(params.base() ** k))


def first_exponent_at_least(params: NearRatioParams, n: int) -> int:
    """Smallest exponent k >= j0 with ceil(base^k) >= n."""
    with mpmath.workprec(BIGFLOAT_BITS + n.bit_length()):
        k = int(mpmath.floor(mpmath.log(n) / mpmath.log(params.base()))) - 1
    k = max(k, params.j0)
    while k > params.j0 and near_ratio_term(params, k) >= n:
        k -= 1
    while near_ratio_term(params, k) < n:
        k += 1
    return k


def _check_near_ratio(q: Fraction, terms: Sequence[int], check_first: bool):
    if check_first:
        first = terms[0] * (q - 1)
        if not (1 < first < 4):
            raise AssertionError(f"first term {terms[0]} violates 1 < l0 (lambda-1) < 4")
    cube = q**3
    for a, b in zip(terms, terms[1:]):
        r = Fraction(b, a)
        if not (q <= r < cube):
            raise AssertionError(f"consecutive ratio {b}/{a} outside [lambda, lambda^3)")


def construct_near_ratio(lam, count: int) -> LacunarySequence:
    """First ``count`` terms of a sequence with lambda <= ratio < lambda^3 and
    1/(lambda-1) < first term < 4/(lambda-1); both properties are checked exactly."""
    if count < 2:
        raise ValueError("count must be at least 2")
    params = near_ratio_params(lam)
    terms = [near_ratio_term(params, params.j0 + j) for j in range(count)]
    _check_near_ratio(params.lam, terms, check_first=True)
    return LacunarySequence(tuple(terms), f"near-ratio lambda={float(params.lam):g}")


def construct_near_ratio_upto(lam, limit: int) -> LacunarySequence:
    """The initial terms of construct_near_ratio that do not exceed ``limit``."""
    params = near_ratio_params(lam)
    count = first_exponent_at_least(params, limit + 1) - params.j0
    if count < 2:
        raise ValueError(f"fewer than two terms below {limit}")
    return construct_near_ratio(lam, count)


def construct_near_ratio_from(lam, below: int, above: int) -> LacunarySequence:
    """The same sequence started later: the first term is the largest one not
    exceeding ``below`` and terms continue until one exceeds ``above``.

    The tail of the construction keeps the ratio bounds, so this is the desk-scale
    rescaling used by the norm-based scans.
    """
    params = near_ratio_params(lam)
    if near_ratio_term(params, params.j0) > below:
        raise ValueError(f"the construction already starts above {below}")
    k = first_exponent_at_least(params, below + 1) - 1
    terms = [near_ratio_term(params, k)]
    while terms[-1] <= above:
        k += 1
        terms.append(near_ratio_term(params, k))
    _check_near_ratio(params.lam, terms, check_first=False)
    return LacunarySequence(tuple(terms), f"near-ratio lambda={float(params.lam):g} from {terms[0]}")


# --------------------------------------------------------------------------
# refinement


def _block_index(n: int) -> int:
    """j with 2^(j-1) <= n < 2^j."""
    return n.bit_length()


def refine(seq: LacunarySequence) -> LacunarySequence:
    """Add all powers 2^(j+3) up to the last term and split every gap [a, b) inside
    a dyadic block [2^(j-1), 2^j) that is longer than 2^(j-3) into equal integer
    pieces.

    The result has 8 as first term, every consecutive interval sits in one dyadic
    block with length at most 2^(j-3), and each closed dyadic block holds at most
    9 (original count + 2) terms.
    """
    terms = list(seq)
    if terms[0] < 8:
        raise ValueError(
            f"refine needs a first term >= 8 (got {terms[0]}); shift the sequence, "
            "e.g. drop its first terms or add a constant"
        )
    if ratio(terms) <= 1:
        raise ValueError("refine needs a lacunary input")
    top = terms[-1]
    dyadics = [1 << k for k in range(3, top.bit_length()) if (1 << k) <= top]
    base = sorted(set(terms) | set(dyadics))
    out = set(base)
    for a, b in zip(base, base[1:]):
        cap = 1 << (_block_index(a) - 3)
        length = b - a
        if length > cap:
            pieces = -(-length // cap)
            out.update(a + (i * length) // pieces for i in range(1, pieces))
    refined = sorted(out)
    _check_refinement(terms, refined)
    return LacunarySequence(tuple(refined), f"refined({seq.label})" if seq.label else "refined")


def _check_refinement(original: Sequence[int], refined: Sequence[int]):
    if refined[0] != 8:
        raise AssertionError("refined sequence must start at 8")
    if not set(original) <= set(refined):
        raise AssertionError("refinement lost an original term")
    for a, b in zip(refined, refined[1:]):
        j = _block_index(a)
        if _block_index(b - 1) != j or j < 4:
            raise AssertionError(f"interval [{a}, {b}) crosses a dyadic boundary")
        if b - a > 1 << (j - 3):
            raise AssertionError(f"interval [{a}, {b}) longer than 2^{j - 3}")
    before = dyadic_block_counts(original)
    after = dyadic_block_counts(refined)
    for n, c in after.items():
        if c > 9 * (before.get(n, 0) + 2):
            raise AssertionError(f"block {n} holds {c} refined terms")


# --------------------------------------------------------------------------
# sequences with many terms per dyadic block


def sigma_block_example(sigma_target: int, M: int) -> LacunarySequence:
    """M + j floor(M/sigma) for j < sigma, then tripling until past 16 M."""
    if M < 1 or M & (M - 1):
        raise ValueError("M must be a power of two")
    if sigma_target < 2:
        raise ValueError("sigma must be at least 2")
    if sigma_target > M:
        raise ValueError(f"sigma={sigma_target} exceeds M={M}")
    step = M // sigma_target
    terms = [M + j * step for j in range(sigma_target)]
    while terms[-1] <= 16 * M:
        terms.append(3 * terms[-1])
    out = LacunarySequence(tuple(terms), f"sigma-block sigma={sigma_target} M={M}")
    assert sigma(out) == sigma_target
    return out


def decompose_into_lacunary(seq: LacunarySequence) -> list[LacunarySequence]:
    """Greedy split into parts with consecutive ratios above 2.

    Each term goes to the first part whose last element is below half the term,
    otherwise it opens a new part.
    """
    parts: list[list[int]] = []
    for t in seq:
        for part in parts:
            if t > 2 * part[-1]:
                part.append(t)
                break
        else:
            parts.append([t])
    s = sigma(seq)
    if len(parts) > 2 * s + 2:
        raise AssertionError(f"{len(parts)} parts exceeds 2 sigma + 2 = {2 * s + 2}")
    return [LacunarySequence(tuple(p), f"part {i}") for i, p in enumerate(parts)]
