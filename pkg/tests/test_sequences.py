from decimal import ROUND_CEILING, Decimal, getcontext
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lplab.sequences import (
    LacunarySequence,
    construct_near_ratio,
    construct_near_ratio_from,
    construct_near_ratio_upto,
    decompose_into_lacunary,
    exact_lambda,
    near_ratio_params,
    ratio,
    refine,
    sigma,
    sigma_block_example,
    stats,
)

GRID = ("1.05", "1.08", "1.1", "1.15", "1.2", "1.25")

# j0 and first five terms, frozen from the decimal oracle below
FROZEN = {
    "1.05": (39, (28, 31, 34, 37, 40)),
    "1.08": (21, (17, 20, 23, 26, 29)),
    "1.1": (16, (15, 18, 21, 24, 29)),
    "1.15": (10, (12, 15, 19, 25, 31)),
    "1.2": (7, (10, 13, 18, 25, 34)),
    "1.25": (5, (8, 11, 16, 23, 34)),
}


def decimal_construction(lam: str, count: int):
    """Independent route: 300-digit decimal exp/log instead of binary mpmath powers."""
    getcontext().prec = 300
    q = Decimal(lam)
    base = (q.ln() * 7 / 4).exp()
    j = 1
    while base**j / (base**j + 1) < q / base:
        j += 1
    terms = [int((base ** (j + k)).to_integral_value(rounding=ROUND_CEILING)) for k in range(count)]
    return j, terms


@pytest.mark.parametrize("lam", GRID)
def test_construction_matches_oracle(lam):
    j0, terms = decimal_construction(lam, 30)
    assert near_ratio_params(float(lam)).j0 == j0
    assert list(construct_near_ratio(float(lam), 30).terms) == terms
    assert (j0, tuple(terms[:5])) == FROZEN[lam]


@pytest.mark.parametrize("lam", GRID)
def test_construction_bounds_exact(lam):
    q = Fraction(lam)
    t = construct_near_ratio(float(lam), 80).terms
    assert 1 < t[0] * (q - 1) < 4
    assert all(q <= Fraction(b, a) < q**3 for a, b in zip(t, t[1:]))


def test_construction_precision_far_out():
    # lambda near 1 pushes terms well past 2^200
    lam = "1.01"
    j0, terms = decimal_construction(lam, 3)
    params = near_ratio_params(1.01)
    from lplab.sequences import near_ratio_term

    far = 40000
    getcontext().prec = 600
    base = (Decimal(lam).ln() * 7 / 4).exp()
    expect = int((base ** (j0 + far)).to_integral_value(rounding=ROUND_CEILING))
    assert expect.bit_length() > 200
    assert near_ratio_term(params, j0 + far) == expect


def test_exact_lambda_reads_decimal_repr():
    assert exact_lambda(1.05) == Fraction(21, 20)


@pytest.mark.parametrize("bad", [1.0, 0.9, 1.26, 2.0])
def test_construction_rejects_lambda(bad):
    with pytest.raises(ValueError):
        construct_near_ratio(bad, 5)


def test_construction_needs_two_terms():
    with pytest.raises(ValueError):
        construct_near_ratio(1.1, 1)


def test_rescaled_tail_keeps_ratio():
    q = Fraction("1.05")
    s = construct_near_ratio_from(1.05, 8192, 32770)
    assert s[0] <= 8192 < s[1] and s[-1] > 32770
    assert set(s.terms) <= set(construct_near_ratio(1.05, 200).terms)
    assert all(q <= Fraction(b, a) < q**3 for a, b in zip(s, s.terms[1:]))
    assert s.terms[:3] == (7826, 8524, 9284)


def test_upto_is_a_prefix():
    s = construct_near_ratio_upto(1.2, 1000)
    assert s[-1] <= 1000 < construct_near_ratio(1.2, len(s) + 1)[-1]


def brute_sigma(terms):
    best = 0
    for n in range(1, max(terms).bit_length() + 2):
        best = max(best, sum(1 for t in terms if 2 ** (n - 1) <= t <= 2**n))
    return best


lacunary = st.lists(st.integers(1, 10**6), min_size=1, max_size=30, unique=True).map(sorted)


@given(lacunary)
def test_sigma_and_ratio_brute_force(terms):
    assert sigma(terms) == brute_sigma(terms)
    if len(terms) > 1:
        assert ratio(terms) == min(b / a for a, b in zip(terms, terms[1:]))


def test_sigma_closed_blocks():
    # 2 and 4 share the closed block {2, 3, 4}
    assert sigma([1, 2, 4, 8]) == 2
    assert sigma([1]) == 1


def test_sequence_validation_and_json():
    with pytest.raises(ValueError):
        LacunarySequence((3, 3))
    with pytest.raises(ValueError):
        LacunarySequence((0, 2))
    s = LacunarySequence((2, 5, 11))
    assert LacunarySequence.from_json(s.to_json()).terms == s.terms
    assert LacunarySequence.from_json('{"terms": [1, 3]}').terms == (1, 3)
    st_ = stats(s)
    assert st_.rho == 2.2 and st_.sigma == 1 and st_.max_term == 11


def test_refine_example():
    s = LacunarySequence((12, 15, 19, 24, 31, 40, 52, 68, 88, 115))
    assert refine(s).terms == (8, 10, 12, 13, 15, 16, 19, 21, 24, 27, 31, 32, 40, 46, 52, 58,
                               64, 68, 78, 88, 101, 115)


def test_refine_rejects_small_start():
    with pytest.raises(ValueError, match="first term"):
        refine(LacunarySequence((4, 8, 16)))


def check_refinement_independently(orig, ref):
    assert ref[0] == 8 and set(orig) <= set(ref)
    for a, b in zip(ref, ref[1:]):
        j = a.bit_length()  # 2^(j-1) <= a < 2^j
        assert 2 ** (j - 1) <= a and b <= 2**j
        assert b - a <= 2 ** (j - 3)
    for n in range(1, ref[-1].bit_length() + 2):
        blk = lambda ts: sum(1 for t in ts if 2 ** (n - 1) <= t <= 2**n)
        assert blk(ref) <= 9 * (blk(orig) + 2)


@given(st.floats(1.02, 3.0), st.integers(8, 200), st.integers(3, 25))
@settings(max_examples=60, deadline=None)
def test_refine_properties(r, start, count):
    terms = [start]
    for _ in range(count):
        terms.append(max(terms[-1] + 1, int(terms[-1] * r)))
    s = LacunarySequence(tuple(terms))
    check_refinement_independently(list(s), list(refine(s)))


def test_sigma_block_examples():
    assert sigma_block_example(4, 4096).terms == (4096, 5120, 6144, 7168, 21504, 64512, 193536)
    assert sigma_block_example(2, 2).terms == (2, 3, 9, 27, 81)
    for s in (4, 8, 16, 32):
        assert sigma(sigma_block_example(s, 8192)) == s


@pytest.mark.parametrize("args", [(4, 100), (1, 64), (128, 64)])
def test_sigma_block_rejects(args):
    with pytest.raises(ValueError):
        sigma_block_example(*args)


def test_decompose_dyadic():
    parts = decompose_into_lacunary(LacunarySequence(tuple(2**k for k in range(12))))
    assert [p.terms[:3] for p in parts] == [(1, 4, 16), (2, 8, 32)]


@given(lacunary)
def test_decompose_properties(terms):
    s = LacunarySequence(tuple(terms))
    parts = decompose_into_lacunary(s)
    assert sorted(t for p in parts for t in p) == terms
    assert all(b > 2 * a for p in parts for a, b in zip(p, p.terms[1:]))
    assert len(parts) <= 2 * sigma(terms) + 2
