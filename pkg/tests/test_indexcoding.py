from fractions import Fraction

import pytest

from codedcache.combinatorics import distinct_demands, permutations_of, user_mask
from codedcache.indexcoding import (
    IcNode,
    IndexCodingGraph,
    acyclic_bound_value,
    build_graph,
    export_graph,
    is_acyclic,
    permutation_levels,
    permutation_set,
    permutation_suite,
    level_structure_ok,
    man_split,
    max_acyclic_bound,
    max_acyclic_set,
    parse_graph,
    uniform_split,
)
from codedcache.converse import inequality_rhs
from codedcache.schemes import SchemeError

W = user_mask
WORKED = [(1, 0), (1, W([2])), (1, W([3])), (1, W([2, 3])), (3, 0), (3, W([2])), (2, 0)]


def test_graph_size_n3():
    g = build_graph(uniform_split(3, 3), (1, 2, 3))
    assert len(g) == 12 == 3 * 2 ** 2


@pytest.mark.parametrize("K", [1, 2, 3, 4])
def test_graph_size_general(K):
    g = build_graph(uniform_split(K, K), tuple(range(1, K + 1)))
    assert len(g) == K * 2 ** (K - 1)


def test_empty_subset_nodes_have_no_out_edges():
    g = build_graph(uniform_split(3, 3), (1, 2, 3))
    for i, n in enumerate(g.nodes):
        if n.subset == 0:
            assert g.out_masks[i] == 0


def test_single_user_graph():
    g = build_graph(uniform_split(1, 1), (1,))
    assert len(g) == 1 and g.edges() == []


def test_zero_length_nodes_are_kept():
    g = build_graph(man_split(3, 3, 1), (1, 2, 3))
    assert len(g) == 12
    assert sum(1 for n in g.nodes if n.length == 0) == 6


@pytest.mark.parametrize("d", list(distinct_demands(4, 3)))
def test_edge_rule_soundness(d):
    g = build_graph(uniform_split(4, 3), d)
    for i, a in enumerate(g.nodes):
        for j, b in enumerate(g.nodes):
            assert g.has_edge(i, j) == bool(a.subset >> (b.requester - 1) & 1)
        assert not a.subset >> (a.requester - 1) & 1


def test_build_graph_needs_distinct_demands():
    with pytest.raises(SchemeError):
        build_graph(uniform_split(3, 3), (1, 1, 2))


def test_worked_permutation_set():
    assert sorted(permutation_set((1, 2, 3), (1, 3, 2))) == sorted(WORKED)
    g = build_graph(uniform_split(3, 3), (1, 2, 3))
    assert is_acyclic(g, WORKED)
    assert acyclic_bound_value(g, WORKED) == Fraction(7, 8)


def test_two_cycle_detected(backend):
    g = build_graph(uniform_split(2, 2), (1, 2))
    pair = [(1, W([2])), (2, W([1]))]
    assert not is_acyclic(g, pair, backend=backend)
    assert is_acyclic(g, [], backend=backend)
    with pytest.raises(ValueError):
        acyclic_bound_value(g, pair)


def test_single_user_set():
    assert permutation_set((4,), (1,)) == [(4, 0)]


def test_permutation_set_size():
    for u in permutations_of(4):
        assert len(permutation_set((1, 2, 3, 4), u)) == sum(2 ** (4 - i) for i in range(1, 5))


@pytest.mark.parametrize("N,K", [(3, 3), (4, 3), (4, 4), (3, 2)])
def test_every_permutation_set_is_acyclic_and_leveled(N, K):
    result = permutation_suite(N, K)
    assert result.pairs == len(list(distinct_demands(N, K))) * len(permutations_of(K))
    assert result.ok


def test_level_check_detects_violation():
    g = build_graph(uniform_split(2, 2), (1, 2))
    # swapping the level order puts an edge into an earlier level
    levels = permutation_levels((1, 2), (1, 2))
    assert level_structure_ok(g, levels)
    assert not level_structure_ok(g, [[(2, W([1]))], [(1, W([2]))]])


def test_empty_set_bound():
    g = build_graph(uniform_split(2, 2), (1, 2))
    assert acyclic_bound_value(g, []) == 0


@pytest.mark.parametrize("t", [0, 1, 2, 3])
def test_permutation_bound_matches_inequality(t):
    split = man_split(3, 3, t)
    for d in distinct_demands(3, 3):
        g = build_graph(split, d)
        for u in permutations_of(3):
            assert acyclic_bound_value(g, permutation_set(d, u)) == inequality_rhs(split, d, u)


def test_max_acyclic_uniform_two_users(backend):
    g = build_graph(uniform_split(2, 2), (1, 2))
    best = max(acyclic_bound_value(g, permutation_set((1, 2), u)) for u in permutations_of(2))
    assert max_acyclic_bound(g, backend=backend) == best == Fraction(3, 4)


def test_max_acyclic_edgeless(backend):
    nodes = [IcNode(1, 0, 1, Fraction(1, 3)), IcNode(2, 0, 2, Fraction(1, 5))]
    g = IndexCodingGraph(2, nodes)
    assert max_acyclic_bound(g, backend=backend) == Fraction(8, 15)


# values frozen from exhaustive subset enumeration with networkx cycle checks
@pytest.mark.parametrize("K,t,expected", [
    (2, 0, 2), (2, 1, Fraction(1, 2)), (2, 2, 0),
    (3, 0, 3), (3, 1, 1), (3, 2, Fraction(1, 3)), (3, 3, 0),
])
def test_max_acyclic_man_split(backend, K, t, expected):
    for d in distinct_demands(K, K):
        g = build_graph(man_split(K, K, t), d)
        value, mask = max_acyclic_set(g, backend=backend)
        assert value == expected
        assert is_acyclic(g, mask)
        for u in permutations_of(K):
            assert value >= acyclic_bound_value(g, permutation_set(d, u))


def test_max_acyclic_guard():
    g = build_graph(uniform_split(4, 4), (1, 2, 3, 4))
    assert len(g) == 32
    with pytest.raises(ValueError):
        max_acyclic_bound(g)


def test_export_roundtrip_and_flags():
    g = build_graph(uniform_split(3, 3), (1, 2, 3))
    text = export_graph(g, [((1, 3, 2), WORKED)])
    assert text.count(" empty\n") == 3
    assert "1,3,2 7/8 " in text
    h, edges = parse_graph(text)
    assert h.nodes == g.nodes
    assert edges == g.edges()


def test_edge_count_invariant_under_user_relabeling():
    split = uniform_split(3, 3)
    counts = {len(build_graph(split, d).edges()) for d in distinct_demands(3, 3)}
    assert counts == {48}
