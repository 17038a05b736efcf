import itertools

import networkx as nx
import pytest
from hypothesis import given, settings, strategies as st

from codedcache import kernels

BACKENDS = kernels.available_backends()


def _digraph(out_masks):
    g = nx.DiGraph()
    g.add_nodes_from(range(len(out_masks)))
    for i, row in enumerate(out_masks):
        for j in range(len(out_masks)):
            if row >> j & 1:
                g.add_edge(i, j)
    return g


@st.composite
def graphs(draw, max_nodes=9):
    n = draw(st.integers(1, max_nodes))
    rows = [draw(st.integers(0, (1 << n) - 1)) & ~(1 << i) for i in range(n)]
    weights = draw(st.lists(st.integers(0, 9), min_size=n, max_size=n))
    return rows, weights


@pytest.mark.parametrize("backend", BACKENDS)
@settings(max_examples=150, deadline=None)
@given(graphs(), st.data())
def test_acyclic_matches_networkx(backend, gw, data):
    rows, _ = gw
    mask = data.draw(st.integers(0, (1 << len(rows)) - 1))
    nodes = [i for i in range(len(rows)) if mask >> i & 1]
    expected = nx.is_directed_acyclic_graph(_digraph(rows).subgraph(nodes))
    assert kernels.induced_acyclic(rows, mask, backend=backend) == expected


@pytest.mark.parametrize("backend", BACKENDS)
@settings(max_examples=100, deadline=None)
@given(graphs(max_nodes=8))
def test_max_acyclic_matches_enumeration(backend, gw):
    rows, weights = gw
    g = _digraph(rows)
    best = 0
    for r in range(len(rows) + 1):
        for combo in itertools.combinations(range(len(rows)), r):
            if nx.is_directed_acyclic_graph(g.subgraph(combo)):
                best = max(best, sum(weights[i] for i in combo))
    value, mask = kernels.max_acyclic_weight(rows, weights, backend=backend)
    assert value == best
    assert kernels.induced_acyclic(rows, mask, backend="python")
    assert sum(weights[i] for i in range(len(rows)) if mask >> i & 1) == value


def test_self_loop_is_a_cycle(backend):
    assert not kernels.induced_acyclic([1], 1, backend=backend)
    assert kernels.induced_acyclic([1], 0, backend=backend)


def test_two_cycle(backend):
    rows = [0b10, 0b01]
    assert not kernels.induced_acyclic(rows, 0b11, backend=backend)
    assert kernels.max_acyclic_weight(rows, [3, 5], backend=backend) == (5, 0b10)


def test_rejects_negative_weights(backend):
    with pytest.raises(ValueError):
        kernels.max_acyclic_weight([0], [-1], backend=backend)


def test_large_weights_fall_back_to_python():
    value, _ = kernels.max_acyclic_weight([0, 0], [2 ** 70, 1])
    assert value == 2 ** 70 + 1


def test_backend_flag_is_consistent():
    assert kernels.BACKEND in kernels.available_backends()
