from fractions import Fraction

import pytest

from codedcache.combinatorics import all_demands, binom, distinct_demands, user_mask
from codedcache.schemes import (
    ProblemInstance,
    SchemeError,
    coded_small_cache_scheme,
    cut_set_bound,
    decode_all,
    large_cache_optimality_check,
    lower_convex_envelope,
    man_corner_points,
    man_delivery,
    man_load,
    man_placement,
)


def test_man_placement_n3_t1():
    p = man_placement(ProblemInstance.for_t(3, 3, 1), 1)
    assert len(p.file_parts(1)) == 3
    cached = {e.parts for e in p.caches[0]}
    assert cached == {frozenset([(j, user_mask([1]))]) for j in (1, 2, 3)}
    assert p.cache_usage(1) == 1


def test_man_placement_empty_caches():
    p = man_placement(ProblemInstance.for_t(3, 3, 0), 0)
    assert all(c == [] for c in p.caches)


def test_man_placement_memory_counts_subfiles():
    p = man_placement(ProblemInstance.for_t(4, 4, 2), 2)
    # each user holds N * B(K-1, t-1) parts of size 1/B(K,t)
    assert len(p.caches[0]) == 4 * binom(3, 1)
    assert p.cache_usage(1) == Fraction(4 * 3, 6) == 2


@pytest.mark.parametrize("N,K", [(2, 2), (3, 3), (4, 4), (5, 3), (3, 4)])
def test_memory_equals_tN_over_K(N, K):
    for t in range(K + 1):
        p = man_placement(ProblemInstance.for_t(N, K, t), t)
        for k in range(1, K + 1):
            assert p.cache_usage(k) == Fraction(t * N, K)
        for j in range(1, N + 1):
            assert sum(p.length(*sid) for sid in p.file_parts(j)) == 1


def test_placement_errors():
    with pytest.raises(SchemeError):
        man_placement(ProblemInstance(3, 3, 1), 2)
    with pytest.raises(SchemeError):
        man_placement(ProblemInstance(3, 3, 1), 4)
    with pytest.raises(SchemeError):
        ProblemInstance(3, 3, 4)


def test_man_delivery_examples():
    p = man_placement(ProblemInstance.for_t(3, 3, 1), 1)
    s = man_delivery(p, (1, 2, 3))
    assert len(s) == 3 and s.load == 1
    p = man_placement(ProblemInstance.for_t(4, 4, 2), 2)
    s = man_delivery(p, (1, 2, 3, 4))
    assert len(s) == binom(4, 3) == 4
    assert all(Fraction(m.bits, p.file_bits) == Fraction(1, 6) for m in s.messages)
    assert s.load == Fraction(2, 3)
    p = man_placement(ProblemInstance.for_t(3, 3, 3), 3)
    assert len(man_delivery(p, (1, 2, 3))) == 0


@pytest.mark.parametrize("K", [2, 3, 4])
def test_man_decodes_every_distinct_demand(K):
    for t in range(K + 1):
        p = man_placement(ProblemInstance.for_t(K, K, t), t, seed=t)
        for d in distinct_demands(K, K):
            s = man_delivery(p, d)
            assert s.load == Fraction(K - t, t + 1) == man_load(K, K, Fraction(t, 1))
            assert decode_all(p, d, s).ok


def test_man_handles_repeated_demands():
    p = man_placement(ProblemInstance.for_t(2, 3, 1), 1)
    for d in all_demands(2, 3):
        assert decode_all(p, d, man_delivery(p, d)).ok


def test_decode_failure_names_user():
    p = man_placement(ProblemInstance.for_t(3, 3, 1), 1)
    s = man_delivery(p, (1, 2, 3)).without(0)
    report = decode_all(p, (1, 2, 3), s)
    assert not report.ok
    assert report.failures
    assert all(v.missing for v in report.failures)


def test_decoder_checks_bits_not_just_bookkeeping():
    p = man_placement(ProblemInstance.for_t(2, 2, 1), 1)
    s = man_delivery(p, (1, 2))
    msg = s.messages[0]
    s.messages[0] = type(msg)(msg.label, msg.parts, msg.payload ^ 1, msg.bits)
    assert not decode_all(p, (1, 2), s).ok


@pytest.mark.parametrize("N,K,load", [(3, 3, 2), (2, 2, 1)])
def test_coded_scheme_load(N, K, load):
    d = tuple(range(1, K + 1))
    p, s = coded_small_cache_scheme(ProblemInstance(N, K, Fraction(1, K)), d)
    assert s.load == load == N * (1 - Fraction(1, K))
    assert decode_all(p, d, s).ok
    assert not p.uncoded
    assert all(p.cache_usage(k) == Fraction(1, K) for k in range(1, K + 1))


def test_coded_scheme_duplicate_demand():
    p, s = coded_small_cache_scheme(ProblemInstance(1, 2, Fraction(1, 2)), (1, 1))
    assert s.load <= 1 - Fraction(1, 2)
    assert decode_all(p, (1, 1), s).ok


@pytest.mark.parametrize("N,K", [(1, 3), (2, 3), (2, 4), (3, 4), (3, 5)])
def test_coded_scheme_all_files_requested(N, K):
    inst = ProblemInstance(N, K, Fraction(1, K))
    for d in all_demands(N, K):
        p, s = coded_small_cache_scheme(inst, d, seed=sum(d))
        assert decode_all(p, d, s).ok
        if len(set(d)) == N:
            assert s.load == N * (1 - Fraction(1, K))


def test_coded_scheme_matches_plain_list_for_unique_demanders():
    p, s = coded_small_cache_scheme(ProblemInstance(3, 3, Fraction(1, 3)), (2, 3, 1))
    sent = {next(iter(m.parts)) for m in s.messages}
    assert all(len(m.parts) == 1 for m in s.messages)
    expected = {(d, user_mask([s_])) for i, d in enumerate((2, 3, 1), start=1)
                for s_ in (1, 2, 3) if s_ != i}
    assert sent == expected


def test_coded_scheme_preconditions():
    with pytest.raises(SchemeError):
        coded_small_cache_scheme(ProblemInstance(3, 2, Fraction(1, 2)), (1, 2))
    with pytest.raises(SchemeError):
        coded_small_cache_scheme(ProblemInstance(2, 2, 1), (1, 2))


@pytest.mark.parametrize("K", [2, 3, 4, 5])
def test_coded_beats_uncoded_at_small_cache(K):
    for N in range(2, K + 1):
        coded = N * (1 - Fraction(1, K))
        assert coded < man_load(N, K, Fraction(1, K), allow_fewer_files=True)
    # a single file gains nothing: both schemes send 1 - 1/K
    assert man_load(1, K, Fraction(1, K), allow_fewer_files=True) == 1 - Fraction(1, K)


def test_man_load_corners():
    assert man_load(3, 3, 1) == 1
    assert man_load(3, 3, 2) == Fraction(1, 3)
    assert man_load(3, 3, 0) == 3
    assert man_load(3, 3, 3) == 0


@pytest.mark.parametrize("N,K", [(3, 3), (4, 2), (5, 4), (4, 4)])
def test_man_load_closed_form_at_corners(N, K):
    for t in range(K + 1):
        M = Fraction(t * N, K)
        assert man_load(N, K, M) == K * (1 - M / N) / (1 + K * M / N)


def test_man_load_time_sharing_midpoint():
    assert man_load(3, 3, Fraction(1, 2)) == (3 + 1) / Fraction(2)


@pytest.mark.parametrize("N,K", [(N, K) for K in range(1, 6) for N in range(1, 6)])
def test_man_load_convex_nonincreasing(N, K):
    grid = [Fraction(j * N, 4 * K) for j in range(4 * K + 1)]
    vals = [man_load(N, K, m, allow_fewer_files=True) for m in grid]
    assert all(b <= a for a, b in zip(vals, vals[1:]))
    diffs = [b - a for a, b in zip(vals, vals[1:])]
    assert all(x <= y for x, y in zip(diffs, diffs[1:]))
    assert vals[-1] == 0


def test_man_load_refuses_fewer_files_by_default():
    with pytest.raises(SchemeError):
        man_load(2, 3, 1)
    # multicast cap active: (K - t) * N / K beats (K - t)/(t + 1) at t = 0
    assert man_load(2, 3, 0, allow_fewer_files=True) == 2


def test_cut_set_examples():
    for M in (0, Fraction(1, 2), 1, 2):
        assert cut_set_bound(3, 3, M) >= 1 - Fraction(M) / 3
    assert cut_set_bound(3, 3, 1) == Fraction(2, 3)
    assert cut_set_bound(5, 3, 0) == 3
    assert cut_set_bound(2, 4, 0) == 2
    assert cut_set_bound(4, 2, 1) == max(1 - Fraction(1, 4), 2 - 2 * Fraction(1, 2)) == 1
    assert cut_set_bound(3, 3, 3) == 0


@pytest.mark.parametrize("N,K", [(N, K) for K in range(1, 6) for N in range(K, 6)])
def test_cut_set_below_achievable(N, K):
    for q in range(2 * N + 1):
        M = Fraction(q * N, 2 * K)
        if M <= N:
            assert cut_set_bound(N, K, M) <= man_load(N, K, M)


def test_large_cache_examples():
    r = large_cache_optimality_check(3, 3)
    assert r.ok and r.points[0].M == 2 and r.points[0].man_load == Fraction(1, 3)
    r = large_cache_optimality_check(4, 2)
    assert r.ok and r.points[0].man_load == Fraction(1, 2) == 1 - Fraction(2, 4)
    assert r.points[1].man_load == r.points[1].cut_set == 0


def test_lower_convex_envelope_drops_points_above():
    pts = [(0, 3), (1, 2), (2, 0), (3, 0)]
    assert lower_convex_envelope(pts) == [(0, 3), (2, 0), (3, 0)]
    assert man_corner_points(3, 3) == [(0, 3), (1, 1), (2, Fraction(1, 3)), (3, 0)]
