# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled graph kernels; same contract as ``_pykernels``.

Restricted to graphs of at most 64 nodes and weight totals below 2**62;
the dispatcher in ``kernels`` routes anything larger to the Python path.
"""
from libc.stdint cimport uint64_t, int64_t
from libc.stdlib cimport malloc, free

MAX_NODES = 64
MAX_TOTAL_WEIGHT = 2 ** 62


cdef extern from *:
    int __builtin_ctzll(unsigned long long) nogil


cdef inline int _lowbit_index(uint64_t x) nogil:
    return __builtin_ctzll(x)


cdef int _acyclic(uint64_t* out, int n, uint64_t mask) nogil:
    cdef int state[64]
    cdef int stack_v[64]
    cdef uint64_t stack_p[64]
    cdef int top, root, v, w
    cdef uint64_t pending, low
    for root in range(n):
        state[root] = 0
    for root in range(n):
        if not ((mask >> root) & 1) or state[root]:
            continue
        state[root] = 1
        top = 0
        stack_v[0] = root
        stack_p[0] = out[root] & mask
        while top >= 0:
            v = stack_v[top]
            pending = stack_p[top]
            if pending == 0:
                state[v] = 2
                top -= 1
                continue
            low = pending & (~pending + 1)
            stack_p[top] = pending ^ low
            w = _lowbit_index(low)
            if state[w] == 1:
                return 0
            if state[w] == 0:
                state[w] = 1
                top += 1
                stack_v[top] = w
                stack_p[top] = out[w] & mask
    return 1


def induced_acyclic(out_masks, mask):
    cdef int n = len(out_masks)
    if n > MAX_NODES:
        raise ValueError("compiled kernel handles at most 64 nodes")
    cdef uint64_t out[64]
    cdef int i
    for i in range(n):
        out[i] = <uint64_t>out_masks[i]
    return bool(_acyclic(out, n, <uint64_t>mask))


cdef inline bint _closes_cycle(uint64_t* out, uint64_t* ins, uint64_t chosen, int v) nogil:
    cdef uint64_t target = ins[v] & chosen
    cdef uint64_t seen = 0, frontier, nxt, f, low
    if target == 0:
        return 0
    frontier = out[v] & chosen
    while frontier:
        if frontier & target:
            return 1
        seen |= frontier
        nxt = 0
        f = frontier
        while f:
            low = f & (~f + 1)
            nxt |= out[_lowbit_index(low)]
            f ^= low
        frontier = nxt & chosen & ~seen
    return 0


def max_acyclic_weight(out_masks, weights):
    cdef int n = len(out_masks)
    if n > MAX_NODES:
        raise ValueError("compiled kernel handles at most 64 nodes")
    if len(weights) != n:
        raise ValueError("weights and adjacency differ in length")
    if any(w < 0 for w in weights):
        raise ValueError("weights must be nonnegative")
    if sum(weights) >= MAX_TOTAL_WEIGHT:
        raise OverflowError("weight total too large for the compiled kernel")

    cdef uint64_t out[64]
    cdef uint64_t ins[64]
    cdef int64_t wts[64]
    cdef int order[64]
    cdef int64_t suffix[65]
    cdef int i, j, m, pos, v
    for i in range(n):
        out[i] = <uint64_t>out_masks[i]
        ins[i] = 0
    for i in range(n):
        for j in range(n):
            if (out[i] >> j) & 1:
                ins[j] |= (<uint64_t>1) << i

    py_order = sorted((i for i in range(n) if weights[i] > 0), key=lambda i: (-weights[i], i))
    m = len(py_order)
    for pos in range(m):
        order[pos] = py_order[pos]
        wts[pos] = weights[py_order[pos]]
    suffix[m] = 0
    for pos in range(m - 1, -1, -1):
        suffix[pos] = suffix[pos + 1] + wts[pos]

    # depth <= m + 1 frames, each branch pushes at most two
    cdef int cap = 2 * m + 2
    cdef int* st_pos = <int*>malloc(cap * sizeof(int))
    cdef uint64_t* st_mask = <uint64_t*>malloc(cap * sizeof(uint64_t))
    cdef int64_t* st_w = <int64_t*>malloc(cap * sizeof(int64_t))
    if st_pos == NULL or st_mask == NULL or st_w == NULL:
        free(st_pos); free(st_mask); free(st_w)
        raise MemoryError()

    cdef int64_t best_w = 0, w
    cdef uint64_t best_mask = 0, chosen
    cdef int top = 0
    try:
        with nogil:
            st_pos[0] = 0
            st_mask[0] = 0
            st_w[0] = 0
            while top >= 0:
                pos = st_pos[top]
                chosen = st_mask[top]
                w = st_w[top]
                top -= 1
                if w > best_w:
                    best_w = w
                    best_mask = chosen
                if pos == m or w + suffix[pos] <= best_w:
                    continue
                v = order[pos]
                top += 1
                st_pos[top] = pos + 1
                st_mask[top] = chosen
                st_w[top] = w
                if not _closes_cycle(out, ins, chosen, v):
                    top += 1
                    st_pos[top] = pos + 1
                    st_mask[top] = chosen | ((<uint64_t>1) << v)
                    st_w[top] = w + wts[pos]
    finally:
        free(st_pos)
        free(st_mask)
        free(st_w)
    return int(best_w), int(best_mask)
