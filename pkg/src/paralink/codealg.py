"""Inter-link codes as scalar linear forms over a prime field.

A code assigns to every link one linear combination of unit-size message
portions, written in a compact text form such as ``"A,B,A+B"`` or
``"A1,A2,A1+A2"``; ``-`` marks an unused link.  Decoding is exact: a
portion is recovered from a set of working links iff its unit vector lies
in the GF(q) span of the columns those links carry.
"""
from __future__ import annotations

import re
import string
from dataclasses import dataclass
from functools import cached_property
from typing import TYPE_CHECKING, Iterable, NamedTuple, Sequence

import numpy as np

from .model import Scenario, upset_probs

if TYPE_CHECKING:
    from .matroid import RankFunction

MAX_FIELD = 257
LETTERS = string.ascii_uppercase


class CodeError(ValueError):
    """Raised for malformed code text or structurally invalid codes."""


class Portion(NamedTuple):
    message: int  # 0-based
    index: int  # 1-based

    def label(self, show_index: bool = True) -> str:
        return LETTERS[self.message] + (str(self.index) if show_index else "")


Symbol = tuple  # tuple[tuple[Portion, int], ...], sorted by portion


def is_prime(q: int) -> bool:
    if q < 2:
        return False
    return all(q % d for d in range(2, int(q ** 0.5) + 1))


def check_field(q: int) -> int:
    if isinstance(q, bool) or not isinstance(q, (int, np.integer)):
        raise CodeError(f"field order must be an integer, got {q!r}")
    q = int(q)
    if not is_prime(q) or q > MAX_FIELD:
        raise CodeError(f"field order {q} must be a prime <= {MAX_FIELD}")
    return q


# ---------------------------------------------------------------------------
# GF(q) elimination

class Basis:
    """Incrementally built echelon basis of a subspace of GF(q)^d."""

    def __init__(self, q: int):
        self.q = q
        self.rows: list[tuple[int, list[int]]] = []  # (pivot, row with row[pivot] == 1)

    def reduce(self, vec: Sequence[int]) -> list[int]:
        q = self.q
        v = [x % q for x in vec]
        for piv, row in self.rows:
            f = v[piv]
            if f:
                v = [(a - f * b) % q for a, b in zip(v, row)]
        return v

    def add(self, vec: Sequence[int]) -> bool:
        """Insert ``vec``; return True if it increased the dimension."""
        v = self.reduce(vec)
        for piv, x in enumerate(v):
            if x:
                inv = pow(x, self.q - 2, self.q)
                self.rows.append((piv, [(a * inv) % self.q for a in v]))
                return True
        return False

    def contains(self, vec: Sequence[int]) -> bool:
        return not any(self.reduce(vec))

    def __len__(self) -> int:
        return len(self.rows)


def gf_rank(vectors: Iterable[Sequence[int]], q: int) -> int:
    basis = Basis(q)
    for v in vectors:
        basis.add(v)
    return len(basis)


# ---------------------------------------------------------------------------
# Code values

@dataclass(frozen=True)
class Code:
    """One inter-link code: ``symbols[i]`` is the linear form sent on link ``i``."""

    q: int
    symbols: tuple[Symbol, ...]

    def __post_init__(self):
        check_field(self.q)
        seen: dict[int, set[int]] = {}
        for sym in self.symbols:
            for portion, coeff in sym:
                if not 1 <= coeff < self.q:
                    raise CodeError(f"coefficient {coeff} of {portion.label()} outside 1..{self.q - 1}")
                if portion.message < 0 or portion.message >= len(LETTERS) or portion.index < 1:
                    raise CodeError(f"invalid portion {portion!r}")
                seen.setdefault(portion.message, set()).add(portion.index)
        if not seen:
            raise CodeError("code has no non-empty symbol")
        for msg, idx in seen.items():
            if idx != set(range(1, max(idx) + 1)):
                raise CodeError(f"portions of message {LETTERS[msg]} are not contiguous from 1: {sorted(idx)}")

    @property
    def n_links(self) -> int:
        return len(self.symbols)

    @cached_property
    def portion_counts(self) -> tuple[int, ...]:
        """Number of portions used per message index (0 for absent messages)."""
        counts = [0] * (self.max_message + 1)
        for sym in self.symbols:
            for portion, _ in sym:
                counts[portion.message] = max(counts[portion.message], portion.index)
        return tuple(counts)

    @cached_property
    def max_message(self) -> int:
        return max(p.message for sym in self.symbols for p, _ in sym)

    @cached_property
    def portions(self) -> tuple[Portion, ...]:
        return tuple(Portion(j, t) for j, n in enumerate(self.portion_counts) for t in range(1, n + 1))

    def ground_portions(self, n_messages: int | None = None) -> tuple[Portion, ...]:
        """Portions in message order; unused messages below ``n_messages`` get one idle portion."""
        total = len(self.portion_counts) if n_messages is None else n_messages
        if total < len(self.portion_counts):
            raise CodeError(f"code uses message {LETTERS[self.max_message]} but only {total} messages given")
        out = []
        for j in range(total):
            n = self.portion_counts[j] if j < len(self.portion_counts) else 0
            out.extend(Portion(j, t) for t in range(1, max(n, 1) + 1))
        return tuple(out)

    def column(self, link: int, portions: Sequence[Portion] | None = None) -> list[int]:
        portions = self.portions if portions is None else portions
        pos = {p: k for k, p in enumerate(portions)}
        col = [0] * len(portions)
        for portion, coeff in self.symbols[link]:
            col[pos[portion]] = coeff
        return col

    @cached_property
    def used_links(self) -> tuple[int, ...]:
        return tuple(i for i, sym in enumerate(self.symbols) if sym)

    @cached_property
    def recovery_table(self) -> tuple[frozenset, ...]:
        """Recoverable portions for every up-set bitmask."""
        return tuple(_recoverable(self, s) for s in range(1 << self.n_links))

    @cached_property
    def recovered_counts(self) -> np.ndarray:
        """``(2**N, n_msg)`` array: portions of each message recovered per up-set."""
        out = np.zeros((1 << self.n_links, len(self.portion_counts)))
        for s, got in enumerate(self.recovery_table):
            for portion in got:
                out[s, portion.message] += 1
        return out

    def permute_links(self, perm: Sequence[int]) -> "Code":
        """Code whose link ``k`` carries what link ``perm[k]`` carried."""
        return Code(self.q, tuple(self.symbols[i] for i in perm))

    def __str__(self) -> str:
        return format_code(self)


def from_columns(columns: Sequence[Sequence[int]], q: int) -> Code:
    """Code with one portion per message; ``columns[i][j]`` is message j's coefficient on link i."""
    symbols = []
    for col in columns:
        symbols.append(tuple((Portion(j, 1), int(c) % q) for j, c in enumerate(col) if int(c) % q))
    return Code(q, tuple(symbols))


_TERM = re.compile(r"(\d*)([A-Za-z])(\d*)")


def parse_code(text: str, q: int = 2) -> Code:
    """Parse code text like ``"A,B,A+2C"`` over GF(q)."""
    q = check_field(q)
    compact = re.sub(r"\s+", "", text)
    if not compact:
        raise CodeError("empty code text")
    symbols = []
    for link, chunk in enumerate(compact.split(",")):
        if chunk == "-":
            symbols.append(())
            continue
        if not chunk:
            raise CodeError(f"link {link + 1}: empty symbol (use '-' for an unused link)")
        terms: dict[Portion, int] = {}
        for term in chunk.split("+"):
            m = _TERM.fullmatch(term)
            if not m or not m.group(2).isupper():
                raise CodeError(f"link {link + 1}: cannot parse term {term!r}")
            coeff = int(m.group(1)) if m.group(1) else 1
            index = int(m.group(3)) if m.group(3) else 1
            if index < 1:
                raise CodeError(f"link {link + 1}: portion index must be >= 1 in {term!r}")
            portion = Portion(LETTERS.index(m.group(2)), index)
            if portion in terms:
                raise CodeError(f"link {link + 1}: duplicate term for {portion.label()}")
            if coeff % q == 0:
                raise CodeError(f"link {link + 1}: coefficient of {term!r} is zero mod {q}")
            terms[portion] = coeff % q
        symbols.append(tuple(sorted(terms.items())))
    return Code(q, tuple(symbols))


def format_code(code: Code) -> str:
    counts = code.portion_counts
    parts = []
    for sym in code.symbols:
        if not sym:
            parts.append("-")
            continue
        terms = []
        for portion, coeff in sym:
            label = portion.label(show_index=counts[portion.message] > 1)
            terms.append(label if coeff == 1 else f"{coeff}{label}")
        parts.append("+".join(terms))
    return ",".join(parts)


# ---------------------------------------------------------------------------
# Decoding and payoff

def _recoverable(code: Code, s: int) -> frozenset:
    portions = code.portions
    basis = Basis(code.q)
    for i in range(code.n_links):
        if (s >> i) & 1 and code.symbols[i]:
            basis.add(code.column(i, portions))
    if not len(basis):
        return frozenset()
    got = []
    for k, portion in enumerate(portions):
        unit = [0] * len(portions)
        unit[k] = 1
        if basis.contains(unit):
            got.append(portion)
    return frozenset(got)


def recoverable_portions(code: Code, s: int) -> frozenset:
    """Portions decodable when exactly the links in bitmask ``s`` are up."""
    if s < 0 or s >> code.n_links:
        raise ValueError(f"up-set {s:#b} has bits outside {code.n_links} links")
    return code.recovery_table[s]


def _check_dims(code: Code, scenario: Scenario) -> None:
    if code.n_links != scenario.n_links:
        raise CodeError(f"code has {code.n_links} links, scenario has {scenario.n_links}")
    if code.max_message >= scenario.n_messages:
        raise CodeError(f"code uses message {LETTERS[code.max_message]} but scenario has "
                        f"{scenario.n_messages} messages")


def upset_values(code: Code, scenario: Scenario) -> np.ndarray:
    """Worth recovered under each up-set, one unit per portion."""
    _check_dims(code, scenario)
    worths = scenario.worths[: len(code.portion_counts)]
    return code.recovered_counts @ worths


def code_payoff(code: Code, scenario: Scenario) -> float:
    """Expected recovered worth from one unit of ``code`` (each used link carries one unit)."""
    return float(upset_probs(scenario) @ upset_values(code, scenario))


def payoff_breakdown(code: Code, scenario: Scenario) -> list[tuple[int, float, list[Portion], float]]:
    """Rows ``(upset, probability, recovered portions, recovered worth)`` by ascending bitmask."""
    probs = upset_probs(scenario)
    values = upset_values(code, scenario)
    return [(s, float(probs[s]), sorted(code.recovery_table[s]), float(values[s]))
            for s in range(1 << code.n_links)]


def is_systematic_code(code: Code) -> bool:
    """True iff every portion used anywhere is also sent alone on some link."""
    alone = {sym[0][0] for sym in code.symbols if len(sym) == 1}
    return all(p in alone for p in code.portions)


def non_systematic_portions(code: Code) -> list[Portion]:
    alone = {sym[0][0] for sym in code.symbols if len(sym) == 1}
    return [p for p in code.portions if p not in alone]


def reduce_code(code: Code, scenario: Scenario | None = None) -> Code:
    """Apply the single-occurrence replacement rule until nothing changes.

    A portion that occurs on exactly one link, mixed with other portions,
    is only ever recoverable when that link is up, and that link is useless
    for anything else; sending the portion alone there cannot hurt.  When a
    symbol holds several such portions, the one of the highest-worth message
    is kept (lowest ``(message, index)`` without a scenario or on ties).
    """
    symbols = list(code.symbols)
    while True:
        where: dict[Portion, list[int]] = {}
        for i, sym in enumerate(symbols):
            for portion, _ in sym:
                where.setdefault(portion, []).append(i)
        target = None
        for i, sym in enumerate(symbols):
            if len(sym) < 2:
                continue
            single = [p for p, _ in sym if len(where[p]) == 1]
            if single:
                if scenario is not None:
                    worths = scenario.worths
                    single.sort(key=lambda p: (-worths[p.message], p))
                target = (i, min(single) if scenario is None else single[0])
                break
        if target is None:
            break
        i, portion = target
        symbols[i] = ((portion, 1),)
        symbols = _renumber(symbols)
    return Code(code.q, tuple(symbols))


def _renumber(symbols: list) -> list:
    """Relabel portion indices of each message to a contiguous 1..t range."""
    used: dict[int, set[int]] = {}
    for sym in symbols:
        for p, _ in sym:
            used.setdefault(p.message, set()).add(p.index)
    remap = {Portion(m, old): Portion(m, new)
             for m, idx in used.items() for new, old in enumerate(sorted(idx), start=1)}
    return [tuple(sorted((remap[p], c) for p, c in sym)) for sym in symbols]


def is_reducible(code: Code) -> bool:
    return reduce_code(code) != code


def matroid_of_code(code: Code, n_messages: int | None = None) -> "RankFunction":
    """Rank function of the code on portions (low bits) plus links (high bits).

    Messages below ``n_messages`` that the code never uses contribute one
    idle portion each, so the ground set lines up with a scenario's messages.
    """
    from .matroid import GroundSet, RankFunction

    if any(not sym for sym in code.symbols):
        raise CodeError("every link must carry a symbol to have a matroid (unit-entropy links)")
    portions = code.ground_portions(n_messages)
    m, n = len(portions), code.n_links
    ground = GroundSet(m, n)
    vectors = []
    for k in range(m):
        unit = [0] * m
        unit[k] = 1
        vectors.append(unit)
    vectors.extend(code.column(i, portions) for i in range(n))
    ranks = [0] * (1 << (m + n))
    for mask in range(1, 1 << (m + n)):
        ranks[mask] = gf_rank((vectors[b] for b in range(m + n) if (mask >> b) & 1), code.q)
    return RankFunction(ground, tuple(ranks), representability="representable")


def portion_worths(code: Code, scenario: Scenario, n_messages: int | None = None) -> list[float]:
    """Worth of each ground portion (a portion inherits its message's worth)."""
    return [float(scenario.messages[p.message].worth) for p in code.ground_portions(n_messages)]
