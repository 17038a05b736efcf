"""Achievable coded caching schemes and a bit-exact simulator.

Two schemes are provided:

* the combinatorial uncoded placement with one XOR multicast per
  ``(t+1)``-subset of users (:func:`man_placement`, :func:`man_delivery`),
  whose load is ``(K-t)/(t+1)``;
* the small-cache scheme with coded placement at ``M = 1/K``
  (:func:`coded_small_cache_scheme`), in which every user stores the XOR of
  its own part of every file.

File contents are random bit strings held as Python ints, so XOR is exact
and arbitrarily wide. :func:`decode_all` is a generic peeling decoder that
does not know which scheme produced the broadcast.
"""
from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from codedcache.combinatorics import (
    as_rational,
    binom,
    format_users,
    full_mask,
    subsets_of,
    users_of,
)

#: A subfile is named by ``(file, label)``. For uncoded placement the label is
#: the mask of users caching it; for the coded scheme it is the mask ``{i}`` of
#: the user whose cache XOR contains it.
SubfileId = tuple[int, int]


class SchemeError(ValueError):
    """A scheme was asked to run outside its preconditions."""


@dataclass(frozen=True)
class ProblemInstance:
    N: int
    K: int
    M: Fraction
    subfile_bits: int = 8

    def __post_init__(self):
        object.__setattr__(self, "M", as_rational(self.M))
        if self.N < 1 or self.K < 1:
            raise SchemeError("need at least one file and one user")
        if not 0 <= self.M <= self.N:
            raise SchemeError(f"memory M={self.M} outside [0, N={self.N}]")
        if self.subfile_bits < 1:
            raise SchemeError("subfile_bits must be positive")

    @classmethod
    def for_t(cls, N: int, K: int, t: int, subfile_bits: int = 8) -> "ProblemInstance":
        return cls(N, K, Fraction(t * N, K), subfile_bits)


def check_demands(d: Sequence[int], N: int, K: int, distinct: bool = False) -> tuple[int, ...]:
    d = tuple(int(x) for x in d)
    if len(d) != K:
        raise SchemeError(f"demand vector has {len(d)} entries, expected K={K}")
    bad = [x for x in d if not 1 <= x <= N]
    if bad:
        raise SchemeError(f"demands {bad} outside [1, {N}]")
    if distinct and len(set(d)) != K:
        raise SchemeError(f"demands {d} are not pairwise distinct")
    return d


@dataclass(frozen=True)
class CacheEntry:
    """One stored string: the XOR of the listed subfiles (a single id if uncoded)."""
    parts: frozenset
    payload: int
    bits: int


@dataclass
class Placement:
    N: int
    K: int
    file_bits: int
    files: list[int]
    subfiles: dict[SubfileId, int]
    subfile_bits: dict[SubfileId, int]
    caches: list[list[CacheEntry]]
    uncoded: bool
    t: int | None = None

    def length(self, j: int, label: int) -> Fraction:
        """Length of a subfile in file units (zero if absent)."""
        return Fraction(self.subfile_bits.get((j, label), 0), self.file_bits)

    def split(self) -> dict[SubfileId, Fraction]:
        """Subfile lengths in file units, keyed by ``(file, user mask)``."""
        return {sid: Fraction(b, self.file_bits) for sid, b in self.subfile_bits.items()}

    def cache_usage(self, user: int) -> Fraction:
        return Fraction(sum(e.bits for e in self.caches[user - 1]), self.file_bits)

    def file_parts(self, j: int) -> list[SubfileId]:
        return sorted(sid for sid in self.subfiles if sid[0] == j)


@dataclass(frozen=True)
class Message:
    label: str
    parts: frozenset
    payload: int
    bits: int


@dataclass
class DeliverySchedule:
    file_bits: int
    messages: list[Message] = field(default_factory=list)

    @property
    def load(self) -> Fraction:
        return Fraction(sum(m.bits for m in self.messages), self.file_bits)

    def __len__(self):
        return len(self.messages)

    def without(self, index: int) -> "DeliverySchedule":
        msgs = list(self.messages)
        del msgs[index]
        return DeliverySchedule(self.file_bits, msgs)


def _random_files(N: int, file_bits: int, seed: int) -> list[int]:
    rng = random.Random(seed)
    return [rng.getrandbits(file_bits) for _ in range(N)]


def _chunks(value: int, total_bits: int, pieces: int) -> list[int]:
    size = total_bits // pieces
    mask = (1 << size) - 1
    return [(value >> (r * size)) & mask for r in range(pieces)]


def _xor(values) -> int:
    acc = 0
    for v in values:
        acc ^= v
    return acc


def man_placement(inst: ProblemInstance, t: int, seed: int = 0) -> Placement:
    """Split every file into ``B(K,t)`` equal parts, one per ``t``-subset of users.

    User ``k`` stores verbatim every part whose subset contains ``k``.
    """
    N, K = inst.N, inst.K
    if not 0 <= t <= K:
        raise SchemeError(f"t={t} outside [0, {K}]")
    if inst.M != Fraction(t * N, K):
        raise SchemeError(f"memory mismatch: M={inst.M} but t*N/K={Fraction(t * N, K)}")
    parts = binom(K, t)
    file_bits = math.lcm(parts, K) * inst.subfile_bits
    files = _random_files(N, file_bits, seed)
    labels = subsets_of(full_mask(K), t)
    subfiles: dict[SubfileId, int] = {}
    sizes: dict[SubfileId, int] = {}
    for j, content in enumerate(files, start=1):
        for label, chunk in zip(labels, _chunks(content, file_bits, parts)):
            subfiles[(j, label)] = chunk
            sizes[(j, label)] = file_bits // parts
    caches = [[CacheEntry(frozenset([sid]), subfiles[sid], sizes[sid])
               for sid in sorted(subfiles) if (sid[1] >> (k - 1)) & 1]
              for k in range(1, K + 1)]
    return Placement(N, K, file_bits, files, subfiles, sizes, caches, uncoded=True, t=t)


def man_delivery(p: Placement, d: Sequence[int]) -> DeliverySchedule:
    """One XOR of ``F[d_s, S minus s]`` over ``s`` in ``S`` for every ``(t+1)``-subset ``S``."""
    if p.t is None or not p.uncoded:
        raise SchemeError("man_delivery needs a placement built by man_placement")
    d = check_demands(d, p.N, p.K)
    sched = DeliverySchedule(p.file_bits)
    if p.t == p.K:
        return sched
    for S in subsets_of(full_mask(p.K), p.t + 1):
        parts = frozenset((d[s - 1], S & ~(1 << (s - 1))) for s in users_of(S))
        bits = max(p.subfile_bits[sid] for sid in parts)
        sched.messages.append(Message(format_users(S), parts,
                                      _xor(p.subfiles[sid] for sid in parts), bits))
    return sched


def coded_small_cache_scheme(inst: ProblemInstance, d: Sequence[int],
                             seed: int = 0) -> tuple[Placement, DeliverySchedule]:
    """Coded placement at ``M = 1/K`` for ``K >= N``.

    Each file is cut into ``K`` parts and user ``i`` caches the XOR of part
    ``i`` of every file. For each file ``n`` with requester set ``U``:

    * part ``s`` is sent in the clear for every ``s`` outside ``U``;
    * the parts indexed by ``U`` are sent as the chain
      ``F[n,u1]^F[n,u2], F[n,u2]^F[n,u3], ...``.

    When every file has exactly one requester this is precisely the list of
    plain parts ``F[d_i, s]``, ``s != i``. Whenever all files are requested
    the load is ``N(K-1)/K = N(1-M)``. A file nobody requested is sent whole
    so users can strip it from their cache XOR.
    """
    N, K = inst.N, inst.K
    if K < N:
        raise SchemeError("coded small-cache scheme needs K >= N")
    if inst.M != Fraction(1, K):
        raise SchemeError(f"coded small-cache scheme needs M = 1/K, got {inst.M}")
    d = check_demands(d, N, K)
    file_bits = K * inst.subfile_bits
    files = _random_files(N, file_bits, seed)
    subfiles: dict[SubfileId, int] = {}
    sizes: dict[SubfileId, int] = {}
    for j, content in enumerate(files, start=1):
        for i, chunk in enumerate(_chunks(content, file_bits, K), start=1):
            subfiles[(j, 1 << (i - 1))] = chunk
            sizes[(j, 1 << (i - 1))] = inst.subfile_bits
    caches = []
    for i in range(1, K + 1):
        parts = frozenset((j, 1 << (i - 1)) for j in range(1, N + 1))
        caches.append([CacheEntry(parts, _xor(subfiles[sid] for sid in parts), inst.subfile_bits)])
    placement = Placement(N, K, file_bits, files, subfiles, sizes, caches, uncoded=False)

    sched = DeliverySchedule(file_bits)
    for n in range(1, N + 1):
        requesters = [i for i in range(1, K + 1) if d[i - 1] == n]
        for s in range(1, K + 1):
            if s not in requesters:
                sid = (n, 1 << (s - 1))
                sched.messages.append(Message(f"F{n},{s}", frozenset([sid]), subfiles[sid],
                                              inst.subfile_bits))
        for a, b in zip(requesters, requesters[1:]):
            pair = frozenset([(n, 1 << (a - 1)), (n, 1 << (b - 1))])
            sched.messages.append(Message(f"F{n},{a}+F{n},{b}", pair,
                                          _xor(subfiles[sid] for sid in pair), inst.subfile_bits))
    return placement, sched


# -- decoding ---------------------------------------------------------------

@dataclass
class UserVerdict:
    user: int
    demand: int
    ok: bool
    missing: list[SubfileId]


@dataclass
class DecodeReport:
    verdicts: list[UserVerdict]

    @property
    def ok(self) -> bool:
        return all(v.ok for v in self.verdicts)

    @property
    def failures(self) -> list[UserVerdict]:
        return [v for v in self.verdicts if not v.ok]


def _peel(equations: list[tuple[frozenset, int]]) -> dict[SubfileId, int]:
    known: dict[SubfileId, int] = {}
    pending = list(equations)
    progress = True
    while progress and pending:
        progress = False
        rest = []
        for parts, payload in pending:
            unknown = [sid for sid in parts if sid not in known]
            if len(unknown) > 1:
                rest.append((parts, payload))
                continue
            if unknown:
                value = payload
                for sid in parts:
                    if sid in known:
                        value ^= known[sid]
                known[unknown[0]] = value
                progress = True
        pending = rest
    return known


def decode_all(p: Placement, d: Sequence[int], s: DeliverySchedule) -> DecodeReport:
    """Let every user combine its cache with the broadcast and rebuild its file.

    A user succeeds only if every part of its demanded file is recovered and
    the reassembled bits equal the original file exactly.
    """
    d = check_demands(d, p.N, p.K)
    verdicts = []
    for k in range(1, p.K + 1):
        equations = [(e.parts, e.payload) for e in p.caches[k - 1]]
        equations += [(m.parts, m.payload) for m in s.messages]
        known = _peel(equations)
        want = p.file_parts(d[k - 1])
        missing = [sid for sid in want if sid not in known]
        ok = not missing
        if ok:
            size = p.file_bits // len(want)
            rebuilt = 0
            for r, sid in enumerate(want):
                rebuilt |= known[sid] << (r * size)
            ok = rebuilt == p.files[d[k - 1] - 1]
        verdicts.append(UserVerdict(k, d[k - 1], ok, missing))
    return DecodeReport(verdicts)


# -- loads and bounds -------------------------------------------------------

def lower_convex_envelope(points: Sequence[tuple[Fraction, Fraction]]) -> list[tuple[Fraction, Fraction]]:
    """Lower convex hull of a point set, left to right (monotone chain)."""
    pts = sorted(set((Fraction(x), Fraction(y)) for x, y in points))
    hull: list[tuple[Fraction, Fraction]] = []
    for pt in pts:
        while len(hull) >= 2:
            (x1, y1), (x2, y2) = hull[-2], hull[-1]
            # drop the middle point unless it lies strictly below the chord
            if (x2 - x1) * (pt[1] - y1) - (y2 - y1) * (pt[0] - x1) <= 0:
                hull.pop()
            else:
                break
        hull.append(pt)
    return hull


def interpolate(corners: Sequence[tuple[Fraction, Fraction]], M) -> Fraction:
    """Evaluate a piecewise-linear curve given by its corner points."""
    M = as_rational(M)
    if M < corners[0][0] or M > corners[-1][0]:
        raise ValueError(f"M={M} outside [{corners[0][0]}, {corners[-1][0]}]")
    for (x1, y1), (x2, y2) in zip(corners, corners[1:]):
        if x1 <= M <= x2:
            return y1 + (y2 - y1) * (M - x1) / (x2 - x1)
    return corners[0][1]


def man_corner_points(N: int, K: int, allow_fewer_files: bool = False) -> list[tuple[Fraction, Fraction]]:
    """Corner points ``(tN/K, load)`` of the achievable curve, hull applied."""
    if N < K and not allow_fewer_files:
        raise SchemeError("N<K: pass allow_fewer_files=True to use the multicast-capped load")
    pts = []
    for t in range(K + 1):
        M = Fraction(t * N, K)
        # K(1 - M/N) * min(1/(1 + KM/N), N/K)
        load = K * (1 - M / N) * min(1 / (1 + K * M / N), Fraction(N, K))
        pts.append((M, load))
    return lower_convex_envelope(pts)


def man_load(N: int, K: int, M, allow_fewer_files: bool = False) -> Fraction:
    """Achievable load with time-sharing between the uncoded-placement corner points."""
    M = as_rational(M)
    if not 0 <= M <= N:
        raise SchemeError(f"M={M} outside [0, {N}]")
    return interpolate(man_corner_points(N, K, allow_fewer_files), M)


def cut_set_bound(N: int, K: int, M) -> Fraction:
    M = as_rational(M)
    best = Fraction(0)
    for s in range(1, min(N, K) + 1):
        best = max(best, s - s * M / (N // s))
    return best


@dataclass
class OptimalityPoint:
    M: Fraction
    man_load: Fraction
    cut_set: Fraction
    expected: Fraction

    @property
    def ok(self) -> bool:
        return self.man_load == self.cut_set == self.expected


@dataclass
class LargeCacheReport:
    N: int
    K: int
    points: list[OptimalityPoint]

    @property
    def ok(self) -> bool:
        return all(pt.ok for pt in self.points)


def large_cache_optimality_check(N: int, K: int) -> LargeCacheReport:
    """Achievable load meets the cut-set bound at ``M = N(K-1)/K`` and ``M = N``.

    Both curves are linear on that segment (the achievable one by time-sharing,
    the cut-set one through its ``s = 1`` term), so equality at the two ends
    gives equality throughout.
    """
    pts = []
    for M, expected in ((Fraction(N * (K - 1), K), Fraction(1, K)), (Fraction(N), Fraction(0))):
        pts.append(OptimalityPoint(M, man_load(N, K, M, allow_fewer_files=True),
                                   cut_set_bound(N, K, M), expected))
    return LargeCacheReport(N, K, pts)

