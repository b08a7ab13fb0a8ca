"""Exact ranking/unranking of M-subsets (colex combinadic) and permutations (Lehmer code).

Everything here uses Python integers, so there is no overflow for any K, M.
"""

from __future__ import annotations

from math import comb, factorial
from typing import Sequence


def unrank_subset(rank: int, n: int, k: int) -> tuple[int, ...]:
    """Return the ``rank``-th k-subset of ``range(n)`` in colexicographic order.

    The result is sorted ascending; rank 0 is ``(0, 1, ..., k-1)``.
    """
    if not 0 <= rank < comb(n, k):
        raise ValueError(f"rank {rank} outside [0, C({n},{k}))")
    out = [0] * k
    r = rank
    c = n - 1
    for i in range(k, 0, -1):
        # largest c with C(c, i) <= r
        while comb(c, i) > r:
            c -= 1
        out[i - 1] = c
        r -= comb(c, i)
        c -= 1
    return tuple(out)


def rank_subset(subset: Sequence[int]) -> int:
    """Colex rank of a set of distinct non-negative integers (order ignored)."""
    s = sorted(subset)
    if len(set(s)) != len(s):
        raise ValueError("subset has repeated elements")
    return sum(comb(c, i) for i, c in enumerate(s, start=1))


def unrank_permutation(rank: int, k: int) -> tuple[int, ...]:
    """Lexicographic ``rank``-th permutation of ``range(k)`` via its Lehmer code."""
    if not 0 <= rank < factorial(k):
        raise ValueError(f"rank {rank} outside [0, {k}!)")
    pool = list(range(k))
    out = []
    r = rank
    for i in range(k - 1, -1, -1):
        digit, r = divmod(r, factorial(i))
        out.append(pool.pop(digit))
    return tuple(out)


def rank_permutation(perm: Sequence[int]) -> int:
    k = len(perm)
    if sorted(perm) != list(range(k)):
        raise ValueError("not a permutation of range(k)")
    pool = list(range(k))
    r = 0
    for i, p in enumerate(perm):
        digit = pool.index(p)
        r += digit * factorial(k - 1 - i)
        pool.pop(digit)
    return r


def gray(n: int) -> int:
    return n ^ (n >> 1)


def gray_inverse(g: int) -> int:
    n = 0
    while g:
        n ^= g
        g >>= 1
    return n


def bits_to_int(bits: Sequence[int]) -> int:
    """MSB-first."""
    v = 0
    for b in bits:
        v = (v << 1) | int(b)
    return v


def int_to_bits(value: int, width: int) -> list[int]:
    return [(value >> (width - 1 - i)) & 1 for i in range(width)]
