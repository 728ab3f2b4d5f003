"""Matroid rank functions over messages plus links.

The ground set has ``m`` message elements in bit positions ``0..m-1`` and
``n`` link elements in positions ``m..m+n-1``; a rank table is indexed by
subset bitmask.  Beyond the matroid axioms (R1 bounds, R2 monotonicity, R3
submodularity) every table here satisfies the code constraints: messages
are independent, each link has rank one, and the messages span everything.
"""
from __future__ import annotations

import itertools
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterator, NamedTuple

import numpy as np

from .model import Scenario, upset_probs

MAX_ELEMENTS = 16
EXHAUSTIVE_R3_LIMIT = 12


class MatroidError(ValueError):
    pass


@dataclass(frozen=True)
class GroundSet:
    m: int
    n: int

    def __post_init__(self):
        if self.m < 1 or self.n < 1:
            raise MatroidError(f"need m >= 1 and n >= 1, got m={self.m}, n={self.n}")
        if self.m + self.n > MAX_ELEMENTS:
            raise MatroidError(f"m+n={self.m + self.n} exceeds {MAX_ELEMENTS}")

    @property
    def size(self) -> int:
        return self.m + self.n

    @property
    def messages_mask(self) -> int:
        return (1 << self.m) - 1

    @property
    def links_mask(self) -> int:
        return ((1 << self.n) - 1) << self.m

    def link_bit(self, i: int) -> int:
        return 1 << (self.m + i)

    def links_to_mask(self, s: int) -> int:
        """Map an up-set bitmask over links into ground-set bits."""
        return s << self.m


@dataclass(frozen=True)
class RankFunction:
    ground: GroundSet
    ranks: tuple[int, ...]
    representability: str = field(default="unknown", compare=False)

    def __post_init__(self):
        if len(self.ranks) != 1 << self.ground.size:
            raise MatroidError(f"rank table has {len(self.ranks)} entries, expected {1 << self.ground.size}")

    @property
    def m(self) -> int:
        return self.ground.m

    @property
    def n(self) -> int:
        return self.ground.n

    def __call__(self, mask: int) -> int:
        return self.ranks[mask]

    @cached_property
    def array(self) -> np.ndarray:
        return np.asarray(self.ranks, dtype=np.int64)

    @cached_property
    def decodability(self) -> np.ndarray:
        """Boolean ``(2**n, m)`` table: message j decodable from link up-set s."""
        r = self.array
        link_sets = np.arange(1 << self.n) << self.m
        return np.stack([r[link_sets] == r[link_sets | (1 << j)] for j in range(self.m)], axis=1)


class Violation(NamedTuple):
    axiom: str
    first: int
    second: int | None = None


@dataclass
class ValidationReport:
    violations: list[Violation]
    count: int

    @property
    def ok(self) -> bool:
        return self.count == 0

    def __bool__(self) -> bool:
        return self.ok


def _popcounts(k: int) -> np.ndarray:
    masks = np.arange(1 << k)
    return np.array([bin(x).count("1") for x in masks])


def validate_rank(rf: RankFunction, max_witnesses: int = 20) -> ValidationReport:
    """Check R1-R3 and the code constraints; report violating subsets.

    R2 is checked on covering pairs ``(S, S+x)``.  R3 is checked on every
    pair of subsets up to ``EXHAUSTIVE_R3_LIMIT`` elements and through the
    equivalent local form ``r(S+x)+r(S+y) >= r(S+x+y)+r(S)`` above that.
    """
    m, n = rf.m, rf.n
    k = m + n
    r = np.asarray(rf.ranks, dtype=np.int64)
    if r.shape != (1 << k,):
        raise MatroidError(f"rank table has {r.size} entries, expected {1 << k}")
    masks = np.arange(1 << k)
    pc = _popcounts(k)
    found: list[Violation] = []
    count = 0

    def record(axiom, firsts, seconds=None):
        nonlocal count
        count += len(firsts)
        room = max_witnesses - len(found)
        for idx in range(min(room, len(firsts))):
            found.append(Violation(axiom, int(firsts[idx]), None if seconds is None else int(seconds[idx])))

    if r[0] != 0:
        record("R1", [0])
    bad = masks[(r < 0) | (r > pc)]
    record("R1", bad[bad != 0])
    record("range", masks[r > m])

    for b in range(k):
        lower = masks[(masks >> b) & 1 == 0]
        upper = lower | (1 << b)
        sel = r[lower] > r[upper]
        record("R2", lower[sel], upper[sel])

    if k <= EXHAUSTIVE_R3_LIMIT:
        for s in range(1 << k):
            sel = r[s | masks] + r[s & masks] > r[s] + r
            if sel.any():
                record("R3", np.full(int(sel.sum()), s), masks[sel])
    else:
        for x, y in itertools.combinations(range(k), 2):
            base = masks[((masks >> x) & 1 == 0) & ((masks >> y) & 1 == 0)]
            sx, sy = base | (1 << x), base | (1 << y)
            sel = r[sx] + r[sy] < r[sx | sy] + r[base]
            record("R3", sx[sel], sy[sel])

    msg = rf.ground.messages_mask
    sub = masks[(masks & ~msg) == 0]
    record("messages-independent", sub[r[sub] != pc[sub]])
    links = np.array([rf.ground.link_bit(i) for i in range(n)])
    record("link-unit-rank", links[r[links] != 1])
    sup = masks[(masks & msg) == msg]
    record("messages-span", sup[r[sup] != m])
    return ValidationReport(found, count)


# ---------------------------------------------------------------------------
# Backtracking enumeration

class _Plan(NamedTuple):
    order: list[int]
    position: list[int]  # position[mask] = index of mask in order
    fixed: dict[int, int]
    drops: list[list[int]]  # S - x for each x in S
    diamonds: list[list[tuple[int, int, int]]]  # (S-x-y, S-x, S-y)
    covers: list[list[int]]  # positions of S + x for each x not in S


def _plan(m: int, n: int) -> _Plan:
    k = m + n
    msg = (1 << m) - 1
    order = sorted(range(1 << k), key=lambda s: (bin(s).count("1"), s))
    position = [0] * (1 << k)
    for pos, s in enumerate(order):
        position[s] = pos
    fixed = {0: 0}
    for s in order:
        size = bin(s).count("1")
        if s & ~msg == 0:
            fixed[s] = size
        elif size == 1:
            fixed[s] = 1
        elif s & msg == msg:
            fixed[s] = m
    drops, diamonds, covers = [], [], []
    for s in order:
        bits = [b for b in range(k) if (s >> b) & 1]
        drops.append([s & ~(1 << b) for b in bits])
        diamonds.append([(s & ~(1 << x) & ~(1 << y), s & ~(1 << x), s & ~(1 << y))
                         for x, y in itertools.combinations(bits, 2)])
        covers.append([position[s | (1 << b)] for b in range(k) if not (s >> b) & 1])
    return _Plan(order, position, fixed, drops, diamonds, covers)


def _search(m: int, n: int, prefix: tuple[int, ...] = (), depth_limit: int | None = None) -> Iterator[tuple[int, ...]]:
    """Depth-first assignment in (cardinality, bitmask) order.

    Each new value is checked against monotonicity, unit increase and the
    local submodular inequalities among assigned sets; then every immediate
    superset is checked to still admit some value (forward checking).
    Yields complete rank tables, or with ``depth_limit`` the partial value
    sequences reaching that depth (used to split the search into parts).
    """
    plan = _plan(m, n)
    k = m + n
    total = 1 << k
    r = [0] * total
    stop = total if depth_limit is None else depth_limit
    order, position = plan.order, plan.position

    def interval(pos, assigned):
        """Feasible value range of set at ``pos`` given sets at positions <= ``assigned``."""
        s = order[pos]
        lo, hi = 0, min(bin(s).count("1"), m)
        for t in plan.drops[pos]:
            if position[t] <= assigned:
                lo = max(lo, r[t])
                hi = min(hi, r[t] + 1)
        for base, a, b in plan.diamonds[pos]:
            if position[a] <= assigned and position[b] <= assigned:
                hi = min(hi, r[a] + r[b] - r[base])
        if s in plan.fixed:
            v = plan.fixed[s]
            return (v, v) if lo <= v <= hi else (1, 0)
        return lo, hi

    def consistent(pos):
        for up in plan.covers[pos]:
            lo, hi = interval(up, pos)
            if lo > hi:
                return False
        return True

    def walk(pos, values):
        if pos == stop:
            yield tuple(values) if depth_limit is not None else tuple(r)
            return
        s = order[pos]
        lo, hi = interval(pos, pos - 1)
        options = range(lo, hi + 1)
        if pos < len(prefix):
            options = [prefix[pos]] if prefix[pos] in options else []
        for v in options:
            r[s] = v
            if consistent(pos):
                values.append(v)
                yield from walk(pos + 1, values)
                values.pop()
        r[s] = 0

    yield from walk(0, [])


def _link_permutation_maps(m: int, n: int) -> list[np.ndarray]:
    k = m + n
    masks = np.arange(1 << k)
    maps = []
    for perm in itertools.permutations(range(n)):
        new = masks & ((1 << m) - 1)
        for i, j in enumerate(perm):
            new = new | (((masks >> (m + i)) & 1) << (m + j))
        maps.append(new)
    return maps


def is_canonical(ranks: tuple[int, ...], maps: list[np.ndarray]) -> bool:
    """True iff ``ranks`` is lexicographically minimal over link relabelings."""
    r = np.asarray(ranks)
    for mp in maps:
        permuted = np.empty_like(r)
        permuted[mp] = r
        diff = np.nonzero(permuted != r)[0]
        if diff.size and permuted[diff[0]] < r[diff[0]]:
            return False
    return True


def _collect(args) -> list[tuple[int, ...]]:
    m, n, prefix = args
    return list(_search(m, n, prefix))


def enumerate_rank_functions(m: int, n: int, dedup: bool = False, jobs: int = 1,
                             check: bool = True) -> Iterator[RankFunction]:
    """Yield every valid rank function on ``m`` messages and ``n`` links exactly once.

    ``dedup`` keeps only the canonical representative of each class under
    link relabeling.  ``jobs > 1`` splits the search by the first assigned
    values and merges parts in order, so output order does not change.
    ``check`` re-validates each table with :func:`validate_rank`.
    """
    ground = GroundSet(m, n)
    maps = _link_permutation_maps(m, n) if dedup else None
    if jobs > 1:
        depth = min(1 << (m + n), 2 * (m + n) + 2)
        prefixes = list(_search(m, n, depth_limit=depth))
        with ProcessPoolExecutor(jobs) as pool:
            tables = itertools.chain.from_iterable(pool.map(_collect, [(m, n, p) for p in prefixes]))
            yield from _emit(ground, tables, maps, check)
    else:
        yield from _emit(ground, _search(m, n), maps, check)


def _emit(ground, tables, maps, check):
    for table in tables:
        if maps is not None and not is_canonical(table, maps):
            continue
        rf = RankFunction(ground, table)
        if check and not validate_rank(rf, max_witnesses=1).ok:
            raise MatroidError(f"enumeration produced an invalid table: {table}")
        yield rf


# ---------------------------------------------------------------------------
# Decoding and payoff

def decodable(rf: RankFunction, s: int, j: int) -> bool:
    """Message ``j`` is recoverable from links ``s`` iff adding it leaves the rank unchanged."""
    if s < 0 or s >> rf.n:
        raise MatroidError(f"up-set {s:#b} has bits outside {rf.n} links")
    if not 0 <= j < rf.m:
        raise MatroidError(f"message index {j} outside 0..{rf.m - 1}")
    S = rf.ground.links_to_mask(s)
    return rf.ranks[S] == rf.ranks[S | (1 << j)]


def matroid_payoff(rf: RankFunction, scenario: Scenario) -> float:
    """Expected worth decoded: each up-set's probability times the worth of the messages it decodes."""
    if scenario.n_messages != rf.m or scenario.n_links != rf.n:
        raise MatroidError(f"scenario is {scenario.n_messages}x{scenario.n_links}, rank function is {rf.m}x{rf.n}")
    return float(upset_probs(scenario) @ (rf.decodability @ scenario.worths))


def messages_covered(rf: RankFunction) -> set[int]:
    links = rf.ground.links_mask
    return {j for j in range(rf.m) if rf.ranks[links] == rf.ranks[links | (1 << j)]}


def is_systematic_matroid(rf: RankFunction) -> bool:
    """Every covered message shares a rank-one flat with some single link."""
    for j in messages_covered(rf):
        if not any(rf.ranks[rf.ground.link_bit(i) | (1 << j)] == 1 for i in range(rf.n)):
            return False
    return True


def rank_function_to_json(rf: RankFunction) -> str:
    return json.dumps({"m": rf.m, "n": rf.n, "ranks": list(rf.ranks),
                       "systematic": is_systematic_matroid(rf),
                       "representability": rf.representability}, separators=(",", ":"))


def rank_function_from_json(line: str) -> RankFunction:
    data = json.loads(line)
    return RankFunction(GroundSet(int(data["m"]), int(data["n"])), tuple(int(x) for x in data["ranks"]),
                        representability=data.get("representability", "unknown"))
