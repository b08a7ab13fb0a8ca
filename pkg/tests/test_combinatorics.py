import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import colex_subsets, lex_permutations
from rfpa.combinatorics import (bits_to_int, gray, gray_inverse, int_to_bits, rank_permutation,
                                rank_subset, unrank_permutation, unrank_subset)


@pytest.mark.parametrize("n", range(1, 13))
def test_subset_unranking_matches_colex_enumeration(n):
    for k in range(0, n + 1):
        expected = colex_subsets(n, k)
        got = [unrank_subset(r, n, k) for r in range(len(expected))]
        assert got == expected
        assert [rank_subset(s) for s in got] == list(range(len(expected)))


@pytest.mark.parametrize("k", range(0, 9))
def test_permutation_unranking_is_lexicographic_bijection(k):
    expected = lex_permutations(k)
    got = [unrank_permutation(r, k) for r in range(len(expected))]
    assert got == expected
    assert len(set(got)) == len(expected)
    assert [rank_permutation(p) for p in got] == list(range(len(expected)))


def test_rank_zero_is_smallest():
    assert unrank_subset(0, 4, 2) == (0, 1)
    assert unrank_permutation(0, 2) == (0, 1)


def test_out_of_range_ranks_rejected():
    with pytest.raises(ValueError):
        unrank_subset(6, 4, 2)
    with pytest.raises(ValueError):
        unrank_permutation(2, 2)
    with pytest.raises(ValueError):
        rank_subset([2, 2])


def test_gray_table_for_four_symbols():
    assert [format(gray(k), "02b") for k in range(4)] == ["00", "01", "11", "10"]


@given(st.integers(0, 2 ** 40))
def test_gray_inverse(n):
    assert gray_inverse(gray(n)) == n
    assert bin(gray(n) ^ gray(n + 1)).count("1") == 1


@given(st.integers(0, 2 ** 20), st.integers(21, 40))
def test_bit_packing_msb_first(value, width):
    bits = int_to_bits(value, width)
    assert len(bits) == width and bits_to_int(bits) == value
    assert int_to_bits(5, 4) == [0, 1, 0, 1]
