from concurrent.futures import ThreadPoolExecutor

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lplab.kernels import extremal_fN, random_analytic, random_poly
from lplab.multipliers import SignVector, draw_signs
from lplab.sequences import LacunarySequence, construct_near_ratio, construct_near_ratio_upto, refine
from lplab.square_function import (
    CoverageError,
    block_projections,
    domination_check,
    randomized_operator,
    refinement_multiplicity,
    square_function,
    square_function_2d,
)
from lplab.torus import TrigPoly, TrigPoly2D, evaluate, evaluate_2d, l2_norm_parseval, lp_norm


def brute_square_function(seq, f, M):
    """Direct per-frequency sums: S(x) = (sum_j |sum_{n in block j} c_n e^{inx}|^2)^(1/2)."""
    x = 2 * np.pi * np.arange(M) / M
    edges = [0] + list(seq.terms)
    total = np.zeros(M)
    for j in range(len(seq)):
        lo, hi = edges[j], edges[j + 1]
        part = np.zeros(M, dtype=complex)
        for n, c in zip(f.frequencies, f.coeffs):
            if lo <= abs(n) < hi:
                part += c * np.exp(1j * n * x)
        total += np.abs(part) ** 2
    return np.sqrt(total)


def test_against_brute_force():
    s = LacunarySequence((3, 7, 16, 40))
    f = random_poly(-30, 25, 5)
    res = square_function(s, f)
    np.testing.assert_allclose(res.samples, brute_square_function(s, f, res.grid_size), atol=1e-10)


@given(st.integers(0, 10**6), st.sampled_from([1.05, 1.1, 1.25]))
@settings(max_examples=40, deadline=None)
def test_l2_isometry(seed, lam):
    s = construct_near_ratio(lam, 40)
    f = random_poly(-400, 300, seed)
    res = square_function(s, f)
    assert lp_norm(res.samples, 2) == pytest.approx(l2_norm_parseval(f), rel=1e-9)
    assert np.sqrt(np.sum(res.per_block_l2**2)) == pytest.approx(l2_norm_parseval(f), rel=1e-9)


def test_single_block_is_modulus(dyadic):
    f = TrigPoly(70, np.array([1, -2j, 0.5, 3]))
    res = square_function(dyadic, f)
    np.testing.assert_allclose(res.samples, np.abs(evaluate(f, res.grid_size).values), atol=1e-12)
    assert res.blocks_used == (7,)


def test_fN_blocks_bookkeeping(dyadic):
    N = 256
    res = square_function(dyadic, extremal_fN(N))
    support = set(range(0, 4 * N + 3))
    edges = [0] + list(dyadic.terms)
    expect = [j for j in range(len(dyadic)) if support & set(range(edges[j], edges[j + 1]))]
    assert list(res.blocks_used) == expect
    assert np.count_nonzero(res.per_block_l2) == len(expect)


def test_coverage_rejected():
    s = LacunarySequence((2, 4, 8, 16))
    with pytest.raises(CoverageError) as e:
        square_function(s, TrigPoly.monomial(-20))
    assert e.value.needed == 21
    square_function(s, TrigPoly.monomial(-15))


def test_zero_input(dyadic):
    res = square_function(dyadic, TrigPoly.zero())
    assert res.blocks_used == () and np.all(res.samples == 0)


def test_threaded_result_bit_identical():
    s = construct_near_ratio(1.1, 40)
    f = random_poly(-900, 900, 4)
    serial = square_function(s, f).samples
    with ThreadPoolExecutor(4) as pool:
        threaded = square_function(s, f, executor=pool).samples
    assert np.array_equal(serial, threaded)


def test_exports(dyadic):
    res = square_function(dyadic, TrigPoly.monomial(5))
    lines = res.to_csv().splitlines()
    assert lines[0] == "x,S" and len(lines) == res.grid_size + 1
    assert float(lines[1].split(",")[1]) == 1.0
    assert '"l2": 1.0' in res.to_json()


def test_2d_product_factorizes(dyadic):
    g, h = random_poly(-40, 50, 1), random_poly(-20, 60, 2)
    res = square_function_2d(dyadic, dyadic, TrigPoly2D.outer(g, h))
    m1, m2 = res.grid_size
    expect = np.outer(square_function(dyadic, g, m1).samples, square_function(dyadic, h, m2).samples)
    np.testing.assert_allclose(res.samples, expect, atol=1e-11)


@pytest.mark.parametrize("seed", range(10))
def test_2d_isometry(seed):
    s1, s2 = construct_near_ratio(1.1, 30), construct_near_ratio(1.2, 20)
    rng = np.random.default_rng(seed)
    F = TrigPoly2D((-20, -15), rng.standard_normal((41, 31)) + 1j * rng.standard_normal((41, 31)))
    res = square_function_2d(s1, s2, F)
    assert lp_norm(res.samples, 2) == pytest.approx(l2_norm_parseval(F), rel=1e-9)


def test_2d_single_rectangle(dyadic):
    F = TrigPoly2D((20, 40), np.array([[1, 2j], [0.5, -1]]))
    res = square_function_2d(dyadic, dyadic, F)
    np.testing.assert_allclose(res.samples, np.abs(evaluate_2d(F, res.grid_size).values), atol=1e-12)


def test_2d_coverage_per_axis(dyadic):
    with pytest.raises(CoverageError) as e:
        square_function_2d(dyadic, LacunarySequence((2, 4)), TrigPoly2D((0, 0), np.ones((3, 5))))
    assert e.value.axis == 1


def test_randomized_all_plus_is_identity(dyadic):
    f = random_poly(-500, 500, 9)
    g = randomized_operator(dyadic, np.ones(len(dyadic), dtype=int), f)
    np.testing.assert_allclose(g.coeffs, f.coeffs)
    assert g.lo == f.lo


def test_randomized_sharp_l2_identity():
    s = construct_near_ratio(1.1, 40)
    f = random_poly(-300, 300, 2)
    energy = np.sum(square_function(s, f).per_block_l2 ** 2)
    for signs in draw_signs(40, 200, 11):
        g = randomized_operator(s, signs, f)
        assert l2_norm_parseval(g) ** 2 == pytest.approx(energy, rel=1e-12)
        assert l2_norm_parseval(g) <= l2_norm_parseval(f) * (1 + 1e-12)


def test_randomized_smoothed_runs():
    s = construct_near_ratio(1.1, 40)
    g = randomized_operator(s, SignVector.from_seed(39, 1), random_analytic(200, 1), smoothed=True)
    assert g.is_analytic


def test_domination_identity_refinement(dyadic):
    r = domination_check(dyadic, dyadic, random_poly(-2000, 2000, 1))
    assert r.multiplicity == 1 and r.ratio == pytest.approx(1.0, abs=1e-12)


def test_domination_equal_energy_pieces():
    d = LacunarySequence(tuple(2**k for k in range(3, 12)))
    rd = refine(d)
    pieces = [t for t in rd.terms if 64 <= t < 128]
    f = TrigPoly.from_dict({t: 1.0 for t in pieces})
    r = domination_check(d, rd, f)
    assert len(pieces) == 4
    assert r.ratio == pytest.approx(np.sqrt(len(pieces)), rel=1e-12)


@pytest.mark.parametrize("lam", [1.1, 1.2, 1.25])
def test_domination_random(lam):
    s = construct_near_ratio_upto(lam, 4096)
    rs = refine(s)
    m = refinement_multiplicity(s, rs)
    assert m <= 18
    top = s[-1] - 1
    for seed in range(5):
        r = domination_check(s, rs, random_poly(-top, top, seed))
        assert r.ratio <= np.sqrt(m) * (1 + 1e-12)


def test_refinement_multiplicity_rejects_non_refinement():
    with pytest.raises(ValueError):
        refinement_multiplicity(LacunarySequence((8, 20)), LacunarySequence((8, 16)))


@pytest.mark.parametrize("p", [1.0, 1.5, 2.0])
def test_monotone_refinement(p):
    s = construct_near_ratio(1.1, 25)
    rs = refine(s)
    m = refinement_multiplicity(s, rs)
    f = random_poly(-600, 600, 3)
    M = 1 << 14
    a = lp_norm(square_function(rs, f, M).samples, p)
    b = lp_norm(square_function(s, f, M).samples, p)
    assert a >= b / np.sqrt(m)


def test_block_projections_partition():
    s = construct_near_ratio(1.15, 20)
    f = random_poly(-200, 200, 8)
    parts = block_projections(s, f)
    total = TrigPoly.zero()
    for g in parts.values():
        total = total + g
    np.testing.assert_allclose(total.coeffs, f.coeffs)
