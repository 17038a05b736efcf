"""Pure-Python graph kernels (fallback for the compiled ``_ckernels``).

Graphs are given as a list of out-neighbour bitmasks: bit ``j`` of
``out_masks[i]`` is set iff there is an edge ``i -> j``.
"""
from __future__ import annotations

from typing import Sequence


def in_masks(out_masks: Sequence[int]) -> list[int]:
    n = len(out_masks)
    ins = [0] * n
    for i, row in enumerate(out_masks):
        j = 0
        while row:
            if row & 1:
                ins[j] |= 1 << i
            row >>= 1
            j += 1
    return ins


def induced_acyclic(out_masks: Sequence[int], mask: int) -> bool:
    """True iff the subgraph induced by ``mask`` has no directed cycle.

    Iterative three-colour DFS; nodes are visited in ascending index order.
    """
    n = len(out_masks)
    state = [0] * n  # 0 unseen, 1 on stack, 2 done
    for root in range(n):
        if not (mask >> root) & 1 or state[root]:
            continue
        state[root] = 1
        stack = [(root, out_masks[root] & mask)]
        while stack:
            v, pending = stack[-1]
            if not pending:
                state[v] = 2
                stack.pop()
                continue
            low = pending & -pending
            stack[-1] = (v, pending ^ low)
            w = low.bit_length() - 1
            if state[w] == 1:
                return False
            if state[w] == 0:
                state[w] = 1
                stack.append((w, out_masks[w] & mask))
    return True


def _closes_cycle(out_masks, ins, chosen: int, v: int) -> bool:
    # a new cycle must run through v: v -> ... (inside chosen) ... -> v
    target = ins[v] & chosen
    if not target:
        return False
    seen = 0
    frontier = out_masks[v] & chosen
    while frontier:
        if frontier & target:
            return True
        seen |= frontier
        nxt = 0
        f = frontier
        while f:
            low = f & -f
            nxt |= out_masks[low.bit_length() - 1]
            f ^= low
        frontier = nxt & chosen & ~seen
    return False


def max_acyclic_weight(out_masks: Sequence[int], weights: Sequence[int]) -> tuple[int, int]:
    """Heaviest node set inducing no directed cycle.

    ``weights`` must be nonnegative integers. Returns ``(weight, mask)``.
    Branch and bound: a node is only added when the set stays acyclic (any
    superset of a cyclic set is cyclic), and a branch is cut once even taking
    every remaining node could not beat the incumbent.
    """
    n = len(out_masks)
    if len(weights) != n:
        raise ValueError("weights and adjacency differ in length")
    if any(w < 0 for w in weights):
        raise ValueError("weights must be nonnegative")
    ins = in_masks(out_masks)
    order = sorted((i for i in range(n) if weights[i] > 0), key=lambda i: (-weights[i], i))
    m = len(order)
    suffix = [0] * (m + 1)
    for pos in range(m - 1, -1, -1):
        suffix[pos] = suffix[pos + 1] + weights[order[pos]]

    best_w, best_mask = 0, 0
    # explicit stack of (position, chosen mask, chosen weight)
    stack = [(0, 0, 0)]
    while stack:
        pos, chosen, w = stack.pop()
        if w > best_w:
            best_w, best_mask = w, chosen
        if pos == m or w + suffix[pos] <= best_w:
            continue
        v = order[pos]
        # push exclude first so include is explored first
        stack.append((pos + 1, chosen, w))
        if not _closes_cycle(out_masks, ins, chosen, v):
            stack.append((pos + 1, chosen | (1 << v), w + weights[v]))
    return best_w, best_mask
