"""Side-information digraphs for uncoded placements and acyclic-set bounds.

With placement and demands fixed, delivery is an index coding problem: one
node per subfile some user still wants, and an edge ``a -> b`` whenever the
user requesting ``b`` already caches ``a``. The broadcast length is at least
the total length of any node set that induces no directed cycle.
"""
from __future__ import annotations

import io
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from codedcache import kernels
from codedcache.combinatorics import (
    as_rational,
    distinct_demands,
    format_rational,
    format_users,
    full_mask,
    is_permutation,
    permutations_of,
    subsets_of,
)
from codedcache.schemes import SchemeError, check_demands

#: Exhaustive search refuses graphs larger than this.
MAX_SEARCH_NODES = 24


@dataclass(frozen=True)
class IcNode:
    file: int
    subset: int
    requester: int
    length: Fraction

    @property
    def key(self) -> tuple[int, int]:
        return (self.file, self.subset)

    def label(self) -> str:
        return f"F{self.file},{format_users(self.subset)}"


class IndexCodingGraph:
    """Immutable digraph over :class:`IcNode` objects.

    ``out_masks[i]`` has bit ``j`` set iff edge ``i -> j``, i.e. the requester
    of node ``j`` belongs to the caching set of node ``i``.
    """

    def __init__(self, K: int, nodes: Sequence[IcNode]):
        self.K = K
        self.nodes = tuple(nodes)
        self._index = {n.key: i for i, n in enumerate(self.nodes)}
        if len(self._index) != len(self.nodes):
            raise ValueError("duplicate (file, subset) nodes; demands must be distinct")
        outs = []
        for a in self.nodes:
            row = 0
            for j, b in enumerate(self.nodes):
                if (a.subset >> (b.requester - 1)) & 1:
                    row |= 1 << j
            outs.append(row)
        self.out_masks = tuple(outs)

    def __len__(self):
        return len(self.nodes)

    def index(self, file: int, subset: int) -> int:
        return self._index[(file, subset)]

    def has_edge(self, i: int, j: int) -> bool:
        return bool((self.out_masks[i] >> j) & 1)

    def edges(self) -> list[tuple[int, int]]:
        return [(i, j) for i in range(len(self)) for j in range(len(self)) if self.has_edge(i, j)]

    def mask_of(self, keys: Iterable[tuple[int, int]]) -> int:
        mask = 0
        for key in keys:
            mask |= 1 << self._index[key]
        return mask

    def keys_of(self, mask: int) -> list[tuple[int, int]]:
        return [n.key for i, n in enumerate(self.nodes) if (mask >> i) & 1]


def build_graph(split: Mapping[tuple[int, int], Fraction], d: Sequence[int], N: int | None = None) -> IndexCodingGraph:
    """Graph for an uncoded split (lengths keyed by ``(file, user mask)``) and demand ``d``.

    Every subfile ``F[d_k, W]`` with ``k`` not in ``W`` becomes a node, in
    order of requester then mask; absent entries get length zero.
    """
    K = len(d)
    if N is None:
        N = max([max(d)] + [j for j, _ in split])
    d = check_demands(d, N, K, distinct=True)
    nodes = []
    for k in range(1, K + 1):
        for W in subsets_of(full_mask(K)):
            if (W >> (k - 1)) & 1:
                continue
            nodes.append(IcNode(d[k - 1], W, k, as_rational(split.get((d[k - 1], W), Fraction(0)))))
    return IndexCodingGraph(K, nodes)


def uniform_split(N: int, K: int) -> dict[tuple[int, int], Fraction]:
    """Every file cut into ``2^K`` equal parts, one per user subset."""
    share = Fraction(1, 2 ** K)
    return {(j, W): share for j in range(1, N + 1) for W in subsets_of(full_mask(K))}


def man_split(N: int, K: int, t: int) -> dict[tuple[int, int], Fraction]:
    """Lengths of the ``B(K,t)``-way split; every other subset has length zero."""
    share = Fraction(1, math.comb(K, t))
    return {(j, W): (share if bin(W).count("1") == t else Fraction(0))
            for j in range(1, N + 1) for W in subsets_of(full_mask(K))}


def is_acyclic(g: IndexCodingGraph, nodes, backend: str | None = None) -> bool:
    """True iff the nodes (indices, ``(file, subset)`` keys, or a bitmask) induce no cycle."""
    return kernels.induced_acyclic(g.out_masks, _as_mask(g, nodes), backend=backend)


def _as_mask(g: IndexCodingGraph, nodes) -> int:
    if isinstance(nodes, int):
        return nodes
    mask = 0
    for n in nodes:
        mask |= 1 << (n if isinstance(n, int) else g.index(*n))
    return mask


def permutation_levels(d: Sequence[int], u: Sequence[int]) -> list[list[tuple[int, int]]]:
    """Node keys of the permutation set, grouped by level.

    Level ``i`` holds ``F[d_{u_i}, W]`` for every ``W`` avoiding ``u_1..u_i``.
    """
    K = len(d)
    if len(set(d)) != K:
        raise SchemeError("permutation sets need distinct demands")
    if not is_permutation(u, K):
        raise ValueError(f"{tuple(u)} is not a permutation of 1..{K}")
    levels = []
    removed = 0
    for ui in u:
        removed |= 1 << (ui - 1)
        free = full_mask(K) & ~removed
        levels.append([(d[ui - 1], W) for W in subsets_of(free)])
    return levels


def permutation_set(d: Sequence[int], u: Sequence[int]) -> list[tuple[int, int]]:
    return [key for level in permutation_levels(d, u) for key in level]


def acyclic_bound_value(g: IndexCodingGraph, nodes, check: bool = True) -> Fraction:
    """Total length of an acyclic node set, a lower bound on the broadcast length."""
    mask = _as_mask(g, nodes)
    if check and not is_acyclic(g, mask):
        raise ValueError("node set contains a directed cycle")
    return sum((n.length for i, n in enumerate(g.nodes) if (mask >> i) & 1), Fraction(0))


def max_acyclic_set(g: IndexCodingGraph, limit: int = MAX_SEARCH_NODES,
                    backend: str | None = None) -> tuple[Fraction, int]:
    """Exhaustive search for the heaviest acyclic node set; returns ``(value, mask)``."""
    if len(g) > limit:
        raise ValueError(f"graph has {len(g)} nodes; exhaustive search limited to {limit}")
    denom = 1
    for n in g.nodes:
        denom = math.lcm(denom, n.length.denominator)
    weights = [int(n.length * denom) for n in g.nodes]
    best, mask = kernels.max_acyclic_weight(g.out_masks, weights, backend=backend)
    return Fraction(best, denom), mask


def max_acyclic_bound(g: IndexCodingGraph, limit: int = MAX_SEARCH_NODES,
                      backend: str | None = None) -> Fraction:
    return max_acyclic_set(g, limit, backend)[0]


# -- text export ------------------------------------------------------------

GRAPH_FORMAT_VERSION = "codedcache-graph 1"


def export_graph(g: IndexCodingGraph, perm_sets: Sequence[tuple[Sequence[int], Sequence[tuple[int, int]]]] = ()) -> str:
    """Adjacency text format (see docs/formats.md).

    ::

        # codedcache-graph 1
        K <K>
        nodes <n>
        <id> <file> <subset_mask> <requester> <length p/q> <label> [empty]
        edges <m>
        <src_id> <dst_id>
        sets <s>
        <u as 1,3,2> <bound p/q> <id> <id> ...
    """
    out = io.StringIO()
    out.write(f"# {GRAPH_FORMAT_VERSION}\n")
    out.write(f"K {g.K}\n")
    out.write(f"nodes {len(g)}\n")
    for i, n in enumerate(g.nodes):
        flag = " empty" if n.subset == 0 else ""
        out.write(f"{i} {n.file} {n.subset} {n.requester} {format_rational(n.length)} {n.label()}{flag}\n")
    edges = g.edges()
    out.write(f"edges {len(edges)}\n")
    for a, b in edges:
        out.write(f"{a} {b}\n")
    if perm_sets:
        out.write(f"sets {len(perm_sets)}\n")
        for u, keys in perm_sets:
            ids = [g.index(*k) for k in keys]
            value = acyclic_bound_value(g, ids)
            out.write(f"{','.join(map(str, u))} {format_rational(value)} {' '.join(map(str, ids))}\n")
    return out.getvalue()


def parse_graph(text: str) -> tuple[IndexCodingGraph, list[tuple[int, int]]]:
    """Inverse of :func:`export_graph` (the optional ``sets`` block is ignored)."""
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0] != f"# {GRAPH_FORMAT_VERSION}":
        raise ValueError("not a codedcache graph file")
    K = int(lines[1].split()[1])
    n = int(lines[2].split()[1])
    nodes = []
    for ln in lines[3:3 + n]:
        parts = ln.split()
        nodes.append(IcNode(int(parts[1]), int(parts[2]), int(parts[3]), Fraction(parts[4])))
    m = int(lines[3 + n].split()[1])
    edges = [tuple(map(int, ln.split())) for ln in lines[4 + n:4 + n + m]]
    return IndexCodingGraph(K, nodes), edges


# -- permutation-set checks -------------------------------------------------

def level_structure_ok(g: IndexCodingGraph, levels: Sequence[Sequence[tuple[int, int]]]) -> bool:
    """No edge leaves a level towards the same level or an earlier one."""
    seen = 0
    for level in levels:
        ids = [g.index(*k) for k in level]
        mask = 0
        for i in ids:
            mask |= 1 << i
        seen |= mask
        if any(g.out_masks[i] & seen for i in ids):
            return False
    return True


@dataclass
class SuiteResult:
    N: int
    K: int
    pairs: int
    acyclic_failures: list
    level_failures: list

    @property
    def ok(self) -> bool:
        return not self.acyclic_failures and not self.level_failures


def permutation_suite(N: int, K: int, split: Mapping[tuple[int, int], Fraction] | None = None,
                 backend: str | None = None) -> SuiteResult:
    """Check every permutation set, for every distinct demand, is acyclic and leveled."""
    if N < K:
        raise SchemeError("N<K unsupported for converse")
    split = uniform_split(N, K) if split is None else split
    perms = permutations_of(K)
    pairs = 0
    bad_acyclic, bad_levels = [], []
    for d in distinct_demands(N, K):
        g = build_graph(split, d, N)
        for u in perms:
            pairs += 1
            levels = permutation_levels(d, u)
            keys = [k for level in levels for k in level]
            if not is_acyclic(g, keys, backend=backend):
                bad_acyclic.append((d, u))
            if not level_structure_ok(g, levels):
                bad_levels.append((d, u))
    return SuiteResult(N, K, pairs, bad_acyclic, bad_levels)
