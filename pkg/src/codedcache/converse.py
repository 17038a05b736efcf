"""Lower bound on the load under uncoded placement with ``N >= K``.

Summing the acyclic-set inequality over every distinct-demand vector and
every user permutation gives, after symmetrisation,

    n >= sum_i c_i x_i,    c_i = (K - i) / ((i + 1) N),

where ``x_i`` is the total length of subfiles cached by exactly ``i`` users.
Together with ``sum_i x_i >= N`` (file sizes) and ``sum_i i x_i <= K M``
(cache sizes) this is a two-constraint LP in the profile ``x``. Cancelling
``x_{q-1}`` and ``x_q`` with those two constraints yields one affine bound in
``M`` per ``q``; their maximum is the converse curve.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Sequence

from codedcache.combinatorics import (
    as_rational,
    binom,
    distinct_demands,
    hockey_stick,
    perm_count,
    permutations_of,
    popcount,
)
from codedcache.indexcoding import permutation_set
from codedcache.schemes import man_load

#: Upper limit on the number of (demand, permutation) pairs enumerated.
MAX_INEQUALITIES = 10 ** 6


class ConverseError(ValueError):
    """Raised when the converse is requested outside ``N >= K >= 1``."""


def _require(N: int, K: int) -> None:
    if K < 1:
        raise ConverseError("K must be positive")
    if N < K:
        raise ConverseError("N<K unsupported for converse")


@dataclass(frozen=True)
class SubfileProfile:
    """Total subfile length per caching-set size, ``x[t]`` for ``t = 0..K``."""
    x: tuple[Fraction, ...]

    def __post_init__(self):
        object.__setattr__(self, "x", tuple(as_rational(v) for v in self.x))
        if any(v < 0 for v in self.x):
            raise ValueError("profile entries must be nonnegative")

    @property
    def K(self) -> int:
        return len(self.x) - 1

    def total(self) -> Fraction:
        return sum(self.x, Fraction(0))

    def cache_total(self) -> Fraction:
        return sum((t * v for t, v in enumerate(self.x)), Fraction(0))

    def feasible(self, N: int, M) -> bool:
        return self.total() >= N and self.cache_total() <= self.K * as_rational(M)

    @classmethod
    def from_split(cls, split, K: int) -> "SubfileProfile":
        x = [Fraction(0)] * (K + 1)
        for (_, W), length in split.items():
            x[popcount(W)] += as_rational(length)
        return cls(tuple(x))


@dataclass(frozen=True)
class AffineBound:
    """``n >= intercept + slope * M + sum_i residual[i] * x_i``."""
    q: int
    intercept: Fraction
    slope: Fraction
    residual: tuple[Fraction, ...]

    def at(self, M) -> Fraction:
        return self.intercept + self.slope * as_rational(M)

    def full(self, M, profile: SubfileProfile) -> Fraction:
        return self.at(M) + sum((z * v for z, v in zip(self.residual, profile.x)), Fraction(0))


@dataclass(frozen=True)
class TradeoffCurve:
    corners: tuple[tuple[Fraction, Fraction], ...]

    def __post_init__(self):
        xs = [m for m, _ in self.corners]
        if any(b <= a for a, b in zip(xs, xs[1:])):
            raise ValueError("corner memories must be strictly increasing")

    @classmethod
    def from_samples(cls, samples: Sequence[tuple[Fraction, Fraction]]) -> "TradeoffCurve":
        """Keep only the points where the slope changes."""
        pts = sorted((as_rational(m), as_rational(v)) for m, v in samples)
        corners = [pts[0]]
        for mid, nxt in zip(pts[1:], pts[2:]):
            (x0, y0) = corners[-1]
            if (mid[1] - y0) * (nxt[0] - x0) != (nxt[1] - y0) * (mid[0] - x0):
                corners.append(mid)
        if len(pts) > 1:
            corners.append(pts[-1])
        return cls(tuple(corners))

    def slopes(self) -> list[Fraction]:
        return [(y2 - y1) / (x2 - x1) for (x1, y1), (x2, y2) in zip(self.corners, self.corners[1:])]

    def is_nonincreasing(self) -> bool:
        return all(b <= a for (_, a), (_, b) in zip(self.corners, self.corners[1:]))

    def is_convex(self) -> bool:
        s = self.slopes()
        return all(a <= b for a, b in zip(s, s[1:]))


# -- aggregation ------------------------------------------------------------

def aggregate_coefficients(N: int, K: int) -> list[Fraction]:
    """Closed-form symmetrised coefficients ``c_i`` for ``i = 0..K``."""
    _require(N, K)
    out = []
    for i in range(K + 1):
        count = hockey_stick(K, i) if i < K else 0
        out.append(Fraction(count, binom(K, i) * N))
    return out


def brute_force_aggregate(N: int, K: int, check_symmetry: bool = True) -> list[Fraction]:
    """Enumerate every (distinct demand, permutation) inequality and average them.

    Each permutation set contributes one unit to the coefficient of each of
    its subfiles. The per-subfile totals must be equal within a caching-set
    size (checked unless ``check_symmetry`` is off); dividing by the number of
    inequalities gives the coefficient per unit of profile ``x_i``.
    """
    _require(N, K)
    total = perm_count(N, K) * perm_count(K, K)
    if total > MAX_INEQUALITIES:
        raise ConverseError(f"{total} inequalities exceed the limit of {MAX_INEQUALITIES}")
    counts: Counter = Counter()
    perms = permutations_of(K)
    for d in distinct_demands(N, K):
        for u in perms:
            counts.update(permutation_set(d, u))
    per_size: dict[int, set[int]] = {i: set() for i in range(K + 1)}
    for j in range(1, N + 1):
        for W in range(1 << K):
            per_size[popcount(W)].add(counts.get((j, W), 0))
    if check_symmetry:
        uneven = {i: sorted(v) for i, v in per_size.items() if len(v) != 1}
        if uneven:
            raise AssertionError(f"subfile coefficients not symmetric: {uneven}")
    return [Fraction(max(per_size[i]), total) for i in range(K + 1)]


def inequality_rhs(split, d: Sequence[int], u: Sequence[int]) -> Fraction:
    """Right-hand side of one permutation inequality, summed level by level."""
    K = len(d)
    removed = 0
    value = Fraction(0)
    for ui in u:
        removed |= 1 << (ui - 1)
        for W in range(1 << K):
            if W & removed:
                continue
            value += as_rational(split.get((d[ui - 1], W), 0))
    return value


# -- elimination ------------------------------------------------------------

def z_coefficient(N: int, K: int, i: int, q: int) -> Fraction:
    """Closed-form residual weight on ``x_i`` left after eliminating ``x_{q-1}, x_q``."""
    if not 1 <= q <= K or not 0 <= i <= K:
        raise ValueError(f"need 1 <= q <= K and 0 <= i <= K, got q={q}, i={i}")
    return Fraction((K + 1) * (i - q + 1) * (i - q), q * N * (q + 1) * (i + 1))


def eliminate(N: int, K: int, q: int, coefficients: Sequence[Fraction] | None = None) -> AffineBound:
    """Cancel ``x_{q-1}`` and ``x_q`` from the aggregated inequality.

    Subtract ``a * (sum x - N)`` and ``b * (K M - sum i x_i)``, both
    nonnegative for ``a, b >= 0``, choosing ``a, b`` so the coefficients of
    ``x_{q-1}`` and ``x_q`` vanish:

        a - (q-1) b = c_{q-1},    a - q b = c_q.

    The bound left over is ``a N - b K M + sum_i (c_i - a + i b) x_i``.
    Nothing here uses the closed form of the residuals; :func:`z_coefficient`
    is compared against this result in the test suite.
    """
    _require(N, K)
    if not 1 <= q <= K:
        raise ValueError(f"q={q} outside [1, {K}]")
    c = list(coefficients) if coefficients is not None else aggregate_coefficients(N, K)
    b = c[q - 1] - c[q]
    a = c[q] + q * b
    if a < 0 or b < 0:
        raise ArithmeticError(f"negative multipliers a={a}, b={b}; bound would be invalid")
    residual = tuple(c[i] - a + i * b for i in range(K + 1))
    return AffineBound(q, a * N, -b * K, residual)


def substitution_chain(N: int, K: int, q: int) -> dict:
    """Replay the elimination by direct substitution, step by step.

    Step 1 rewrites ``x_{q-1}`` with the file constraint. Step 2 rewrites
    ``x_q`` with ``cache - (q-1) * file``, i.e.
    ``sum_i (i-q+1) x_i <= K M - (q-1) N``, which carries no ``x_{q-1}``
    term (for ``q = 1`` it is the cache constraint itself). Returns the
    intermediate linear forms so a hand-worked chain can be checked line by
    line. Linear forms are dicts over ``x0..xK``, ``"M"`` and ``"1"``.
    """
    _require(N, K)
    if not 1 <= q <= K:
        raise ValueError(f"q={q} outside [1, {K}]")
    c = aggregate_coefficients(N, K)
    form = {f"x{i}": c[i] for i in range(K + 1)}
    form.update(M=Fraction(0), **{"1": Fraction(0)})
    steps = [dict(form)]
    # x_{q-1} >= N - sum_{i != q-1} x_i, weighted by its (nonnegative) coefficient
    w = form[f"x{q - 1}"]
    form[f"x{q - 1}"] = Fraction(0)
    form["1"] += w * N
    for i in range(K + 1):
        if i != q - 1:
            form[f"x{i}"] -= w
    steps.append(dict(form))
    # x_q <= K M - (q-1) N - sum_{i != q-1, q} (i-q+1) x_i; coefficient is now <= 0
    w = form[f"x{q}"]
    if w > 0:
        raise ArithmeticError("cache substitution needs a nonpositive coefficient")
    form[f"x{q}"] = Fraction(0)
    form["M"] += w * K
    form["1"] -= w * (q - 1) * N
    for i in range(K + 1):
        if i not in (q - 1, q):
            form[f"x{i}"] -= w * (i - q + 1)
    steps.append(dict(form))
    return {"steps": steps, "intercept": form["1"], "slope": form["M"],
            "residual": tuple(form[f"x{i}"] for i in range(K + 1))}


def affine_bounds(N: int, K: int) -> list[AffineBound]:
    return [eliminate(N, K, q) for q in range(1, K + 1)]


def lower_bound_with_q(N: int, K: int, M) -> tuple[Fraction, int]:
    """Best affine bound at ``M`` (residual terms dropped), floored at 0; smallest ``q`` on ties."""
    _require(N, K)
    M = as_rational(M)
    if not 0 <= M <= N:
        raise ValueError(f"M={M} outside [0, {N}]")
    best, best_q = None, 0
    for bound in affine_bounds(N, K):
        v = bound.at(M)
        if best is None or v > best:
            best, best_q = v, bound.q
    return max(best, Fraction(0)), best_q


def lower_bound(N: int, K: int, M) -> Fraction:
    return lower_bound_with_q(N, K, M)[0]


# -- LP oracle --------------------------------------------------------------

def lp_oracle_solution(N: int, K: int, M) -> tuple[Fraction, SubfileProfile]:
    """Exact minimum of ``sum c_i x_i`` over profiles meeting both size constraints.

    With two constraints besides ``x >= 0`` every vertex has at most two
    nonzero coordinates, so checking all singletons and pairs is exhaustive.
    """
    _require(N, K)
    M = as_rational(M)
    if M < 0:
        raise ValueError("M must be nonnegative")
    c = aggregate_coefficients(N, K)
    cap = K * M
    best = None

    def consider(x: dict[int, Fraction]):
        nonlocal best
        if any(v < 0 for v in x.values()):
            return
        if sum(x.values()) < N or sum(t * v for t, v in x.items()) > cap:
            return
        value = sum(c[t] * v for t, v in x.items())
        if best is None or value < best[0]:
            best = (value, x)

    for t in range(K + 1):
        consider({t: Fraction(N)})
        if t > 0:
            consider({t: cap / t})
    for t1, t2 in combinations(range(K + 1), 2):
        hi = (cap - t1 * N) / (t2 - t1)
        consider({t1: N - hi, t2: hi})
    if best is None:
        raise ArithmeticError("no feasible vertex found")
    value, x = best
    profile = SubfileProfile(tuple(x.get(t, Fraction(0)) for t in range(K + 1)))
    return value, profile


def lp_oracle(N: int, K: int, M) -> Fraction:
    return lp_oracle_solution(N, K, M)[0]


# -- verification -----------------------------------------------------------

def default_grid(N: int, K: int) -> list[Fraction]:
    """Every corner ``tN/K`` and every midpoint between neighbours."""
    return [Fraction(j * N, 2 * K) for j in range(2 * K + 1)]


@dataclass
class GridRow:
    M: Fraction
    lower_bound: Fraction
    lp_oracle: Fraction
    man_load: Fraction
    q: int

    @property
    def ok(self) -> bool:
        return self.lower_bound == self.lp_oracle == self.man_load


@dataclass
class OptimalityReport:
    N: int
    K: int
    rows: list[GridRow] = field(default_factory=list)
    converse_curve: TradeoffCurve | None = None
    achievable_curve: TradeoffCurve | None = None

    @property
    def mismatches(self) -> list[GridRow]:
        return [r for r in self.rows if not r.ok]

    @property
    def curves_match(self) -> bool:
        return self.converse_curve == self.achievable_curve

    @property
    def ok(self) -> bool:
        return not self.mismatches and self.curves_match and self.converse_curve.is_convex()


def converse_curve(N: int, K: int) -> TradeoffCurve:
    return TradeoffCurve.from_samples([(M, lower_bound(N, K, M)) for M in default_grid(N, K)])


def achievable_curve(N: int, K: int) -> TradeoffCurve:
    return TradeoffCurve.from_samples([(M, man_load(N, K, M)) for M in default_grid(N, K)])


def verify_optimality(N: int, K: int, grid: Sequence | None = None) -> OptimalityReport:
    """Check converse == LP optimum == achievable load at every grid point."""
    _require(N, K)
    grid = default_grid(N, K) if grid is None else [as_rational(m) for m in grid]
    report = OptimalityReport(N, K)
    for M in grid:
        lb, q = lower_bound_with_q(N, K, M)
        report.rows.append(GridRow(M, lb, lp_oracle(N, K, M), man_load(N, K, M), q))
    report.converse_curve = converse_curve(N, K)
    report.achievable_curve = achievable_curve(N, K)
    return report


@dataclass
class ResidualRow:
    q: int
    i: int
    eliminated: Fraction
    closed_form: Fraction
    chained: Fraction

    @property
    def ok(self) -> bool:
        vanishes = self.i not in (self.q - 1, self.q) or self.eliminated == 0
        return (self.eliminated >= 0 and vanishes
                and self.eliminated == self.closed_form == self.chained)


def residual_check(N: int, K: int) -> list[ResidualRow]:
    """Compare the three routes to the residual weights for every ``q`` and ``i``."""
    rows = []
    for q in range(1, K + 1):
        elim = eliminate(N, K, q).residual
        chain = substitution_chain(N, K, q)["residual"]
        for i in range(K + 1):
            rows.append(ResidualRow(q, i, elim[i], z_coefficient(N, K, i, q), chain[i]))
    return rows
