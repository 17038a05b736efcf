"""Exact arithmetic and enumeration helpers shared by every other module.

User sets are plain ``int`` bitmasks: user ``k`` (1-based) lives at bit ``k-1``.
Exact quantities use :class:`fractions.Fraction`, which is always reduced,
keeps a positive denominator and never overflows.
"""
from __future__ import annotations

import itertools
import math
from fractions import Fraction
from typing import Iterable, Iterator, Sequence

Rational = Fraction

#: Largest permutation length :func:`permutations_of` will enumerate.
MAX_PERMUTATION_LENGTH = 10
#: Users are limited so that every user set fits comfortably in a machine word.
MAX_USERS = 20


def as_rational(value) -> Fraction:
    """Coerce ints, Fractions and ``"p/q"`` strings to a Fraction.

    Floats are rejected on purpose: every quantity here must be exact.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value.strip())
    raise TypeError(f"cannot convert {type(value).__name__} to an exact rational")


def format_rational(value: Fraction) -> str:
    """Render as ``"p/q"`` (or ``"p"`` for integers)."""
    value = Fraction(value)
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


def binom(n: int, k: int) -> int:
    if n < 0 or k < 0:
        raise ValueError("binom is defined for nonnegative arguments only")
    return math.comb(n, k)


def perm_count(n: int, k: int) -> int:
    """Number of ``k``-permutations of ``n`` items, ``n(n-1)...(n-k+1)``."""
    if n < 0 or k < 0:
        raise ValueError("perm_count is defined for nonnegative arguments only")
    return math.perm(n, k)


def hockey_stick(K: int, i: int) -> int:
    """Literal sum ``B(K-1,i) + B(K-2,i) + ... + B(i,i)``.

    This counts, for one permutation inequality, how many subfiles cached by
    exactly ``i`` users appear on its right-hand side. It is kept as an explicit
    sum so it can be checked against the closed form ``B(K, i+1)``.
    """
    if K < 1:
        raise ValueError("K must be positive")
    if not 0 <= i <= K - 1:
        raise ValueError(f"i must lie in [0, {K - 1}], got {i}")
    return sum(binom(m, i) for m in range(K - 1, i - 1, -1))


# -- user sets ---------------------------------------------------------------

def user_mask(users: Iterable[int]) -> int:
    """Bitmask for a collection of 1-based user ids."""
    mask = 0
    for u in users:
        if u < 1 or u > MAX_USERS:
            raise ValueError(f"user id {u} outside [1, {MAX_USERS}]")
        mask |= 1 << (u - 1)
    return mask


def full_mask(K: int) -> int:
    return (1 << K) - 1


def users_of(mask: int) -> tuple[int, ...]:
    """1-based user ids present in ``mask``, ascending."""
    out = []
    k = 1
    while mask:
        if mask & 1:
            out.append(k)
        mask >>= 1
        k += 1
    return tuple(out)


def popcount(mask: int) -> int:
    return bin(mask).count("1")


def contains(mask: int, user: int) -> bool:
    return bool(mask >> (user - 1) & 1)


def format_users(mask: int) -> str:
    """Compact label: ``"23"`` for {2,3}, ``"{}"`` for the empty set.

    Ids above 9 are comma-separated so labels stay unambiguous.
    """
    users = users_of(mask)
    if not users:
        return "{}"
    if max(users) > 9:
        return ",".join(map(str, users))
    return "".join(map(str, users))


def subsets_of(ground: int, size: int | None = None) -> list[int]:
    """All subsets of ``ground`` (optionally of one cardinality), ascending."""
    if ground < 0:
        raise ValueError("ground set mask must be nonnegative")
    out = []
    # standard submask walk, visited in descending order then reversed
    sub = ground
    while True:
        if size is None or popcount(sub) == size:
            out.append(sub)
        if sub == 0:
            break
        sub = (sub - 1) & ground
    out.reverse()
    return out


def permutations_of(k: int) -> list[tuple[int, ...]]:
    """All orderings of ``1..k`` in lexicographic order."""
    if k < 1:
        raise ValueError("k must be positive")
    if k > MAX_PERMUTATION_LENGTH:
        raise ValueError(
            f"refusing to enumerate {k}! permutations (limit k <= {MAX_PERMUTATION_LENGTH})")
    return list(itertools.permutations(range(1, k + 1)))


def distinct_demands(N: int, K: int) -> Iterator[tuple[int, ...]]:
    """Demand vectors with pairwise distinct entries from ``1..N``, lexicographic."""
    return itertools.permutations(range(1, N + 1), K)


def all_demands(N: int, K: int) -> Iterator[tuple[int, ...]]:
    return itertools.product(range(1, N + 1), repeat=K)


def is_permutation(u: Sequence[int], k: int) -> bool:
    return len(u) == k and sorted(u) == list(range(1, k + 1))
