import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lplab.multipliers import (
    SignVector,
    apply,
    draw_signs,
    mikhlin_constant,
    randomized_sum,
    sharp_symbol,
    smoothed_indices,
    smoothed_symbol,
)
from lplab.sequences import LacunarySequence, construct_near_ratio, ratio
from lplab.torus import TrigPoly


def brute_mikhlin(sym):
    """Loop over every n with one step of zero padding on each side."""
    m = lambda n: sym.values[n - sym.window_lo] if sym.window_lo <= n <= sym.window_hi else 0.0
    return max(abs(n) * abs(m(n + 1) - m(n)) for n in range(sym.window_lo - 2, sym.window_hi + 2))


def test_sharp_symbols_partition(dyadic):
    top = dyadic[-1] - 1
    total = np.zeros(2 * top + 1)
    for j in range(len(dyadic)):
        s = sharp_symbol(dyadic, j)
        total[s.window_lo + top : s.window_hi + top + 1] += s.values
    np.testing.assert_array_equal(total, 1.0)


def test_sharp_symbol_support():
    s = LacunarySequence((4, 9, 20))
    m = sharp_symbol(s, 1)
    n = np.arange(-25, 26)
    expect = ((np.abs(n) >= 4) & (np.abs(n) <= 8)).astype(float)
    np.testing.assert_array_equal(m(n), expect)
    np.testing.assert_array_equal(sharp_symbol(s, 0)(n), (np.abs(n) <= 3).astype(float))


def test_smoothed_contains_sharp():
    s = construct_near_ratio(1.1, 20)
    n = np.arange(-s[-1] - 2, s[-1] + 3)
    for j in smoothed_indices(s):
        sh, sm = sharp_symbol(s, j)(n), smoothed_symbol(s, j)(n)
        # Delta_j smoothed-Delta_j = Delta_j
        np.testing.assert_array_equal(sh * sm, sh)
        assert np.all((sm >= 0) & (sm <= 1))


def test_smoothed_symbol_shape():
    s = LacunarySequence((8, 16, 32, 64))
    m = smoothed_symbol(s, 2)
    assert m(np.array([8, 12, 16, 24, 32, 48, 64]).tolist()).tolist() == [0, 0.5, 1, 1, 1, 0.5, 0]
    np.testing.assert_array_equal(m(np.arange(-70, 71)), m(-np.arange(-70, 71)))


def test_smoothed_first_neighbour_degenerate():
    with pytest.raises(ValueError, match="degenerate"):
        smoothed_symbol(LacunarySequence((1, 3, 7)), 1)


def test_smoothed_degenerate_flag():
    assert smoothed_symbol(LacunarySequence((5, 6, 12)), 0).degenerate
    assert not smoothed_symbol(LacunarySequence((5, 8, 12)), 0).degenerate


def test_smoothed_index_range():
    s = LacunarySequence((8, 16, 32))
    with pytest.raises(IndexError):
        smoothed_symbol(s, 2)
    assert list(smoothed_indices(s)) == [0, 1]


def test_dyadic_mikhlin_is_two(dyadic):
    for j in range(3, 8):
        assert mikhlin_constant(smoothed_symbol(dyadic, j)) == 2.0


@given(st.integers(0, 2**32), st.sampled_from([1.05, 1.1, 1.25]))
@settings(max_examples=20, deadline=None)
def test_mikhlin_brute_force(seed, lam):
    s = construct_near_ratio(lam, 12)
    sym = randomized_sum(s, SignVector.from_seed(11, seed), smoothed=True)
    assert mikhlin_constant(sym) == pytest.approx(brute_mikhlin(sym), rel=1e-12)


def test_signs_deterministic_and_fair():
    a = draw_signs(50, 200, 7)
    np.testing.assert_array_equal(a, draw_signs(50, 200, 7))
    assert set(np.unique(a)) == {-1, 1}
    assert abs(a.mean()) < 0.05
    with pytest.raises(ValueError):
        SignVector(np.array([1, 0, -1]), 0)


def test_randomized_sum_sup_bounds():
    s = construct_near_ratio(1.1, 30)
    for seed in range(5):
        sharp = randomized_sum(s, SignVector.from_seed(30, seed), smoothed=False)
        assert sharp.sup() == 1.0
        smooth = randomized_sum(s, SignVector.from_seed(29, seed), smoothed=True)
        assert smooth.sup() <= 2.0 + 1e-12


def test_randomized_sum_needs_signs():
    with pytest.raises(ValueError):
        randomized_sum(construct_near_ratio(1.1, 10), np.ones(3, dtype=int), smoothed=False)


def test_apply_and_csv(dyadic):
    f = TrigPoly(-5, np.ones(11))
    g = apply(sharp_symbol(dyadic, 2), f)
    assert set(g.as_dict()) == {-3, -2, 2, 3}
    csv = sharp_symbol(LacunarySequence((2, 4)), 0).to_csv()
    assert csv.splitlines() == ["n,value", "-1,1", "0,1", "1,1"]


def test_mikhlin_times_gap_bounded():
    for lam in (1.05, 1.25):
        s = construct_near_ratio(lam, 30)
        c = max(mikhlin_constant(randomized_sum(s, SignVector.from_seed(29, k), True)) for k in range(8))
        assert c * (ratio(s) - 1) <= 6
