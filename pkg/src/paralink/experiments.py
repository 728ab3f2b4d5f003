"""Seeded randomized experiments.

Every trial draws from its own generator, ``numpy.random.default_rng([seed,
trial])`` (PCG64 seeded through SeedSequence), so a report depends only on
the configuration and not on how trials are scheduled.
"""
from __future__ import annotations

import itertools
import json
import math
from dataclasses import asdict, dataclass, field
from typing import Sequence, Union

import numpy as np

from .codealg import (Code, CodeError, Portion, check_field, format_code, from_columns,
                      is_reducible, is_systematic_code, upset_values)
from .lpopt import build_17_code_library, build_lp, check_solution, solve_lp, used_codes
from .matroid import RankFunction, is_systematic_matroid
from .model import LinkSpec, MessageSpec, Scenario, canonical_order, scenario_from_dict, scenario_to_dict, upset_probs

TIE_REL = 1e-9
USED_TOL = 1e-6

Candidate = Union[Code, RankFunction]


@dataclass(frozen=True)
class TrialConfig:
    m: int
    n: int
    trials: int
    seed: int
    worth_low: float = 1.0
    worth_high: float = 100.0
    field: int = 2
    capacity_high: float = 2.0
    size_high: float = 2.0

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.m < 1 or self.n < 1:
            raise ValueError("m and n must be >= 1")
        if not self.worth_low <= self.worth_high:
            raise ValueError("worth_low must not exceed worth_high")
        if self.worth_low < 0 or self.capacity_high < 0 or self.size_high < 0:
            raise ValueError("worth, capacity and size ranges must be nonnegative")
        if not 0 <= self.seed < 2 ** 64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        check_field(self.field)


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    return np.random.default_rng([seed, trial])


def random_scenario(rng: np.random.Generator, m: int, n: int, config: TrialConfig) -> Scenario:
    """Unit sizes and capacities, uniform outage probabilities, uniform worths."""
    outage = rng.random(n)
    worths = rng.uniform(config.worth_low, config.worth_high, m)
    return Scenario(tuple(LinkSpec(1.0, float(p)) for p in outage),
                    tuple(MessageSpec(1.0, float(w)) for w in worths))


def random_general_scenario(rng: np.random.Generator, m: int, n: int, config: TrialConfig) -> Scenario:
    """Like :func:`random_scenario`, with capacities in (0, capacity_high] and sizes in (0, size_high]."""
    outage = rng.random(n)
    worths = rng.uniform(config.worth_low, config.worth_high, m)
    caps = config.capacity_high * (1.0 - rng.random(n))
    sizes = config.size_high * (1.0 - rng.random(m))
    return Scenario(tuple(LinkSpec(float(c), float(p)) for c, p in zip(caps, outage)),
                    tuple(MessageSpec(float(s), float(w)) for s, w in zip(sizes, worths)))


# ---------------------------------------------------------------------------
# Candidate codes

def projective_points(m: int, q: int) -> list[tuple[int, ...]]:
    """Nonzero vectors of GF(q)^m with first nonzero entry 1, in lexicographic order."""
    pts = []
    for vec in itertools.product(range(q), repeat=m):
        nz = [x for x in vec if x]
        if nz and nz[0] == 1:
            pts.append(vec)
    return sorted(pts, key=lambda v: tuple(-x for x in v))


def enumerate_candidate_codes(m: int, n: int, q: int = 2, prune: bool = False) -> list[Code]:
    """All multisets of ``n`` projective columns over GF(q)^m, one portion per message.

    With ``prune``, codes that the single-occurrence replacement rule would
    change are dropped (each is dominated by its reduction).
    """
    check_field(q)
    if m > 3 or n > 5 or q > 3:
        raise ValueError(f"candidate enumeration limited to m<=3, n<=5, q<=3 (got m={m}, n={n}, q={q})")
    codes = []
    for cols in itertools.combinations_with_replacement(projective_points(m, q), n):
        code = from_columns(cols, q)
        if prune and is_reducible(code):
            continue
        codes.append(code)
    return codes


def _arrangement_index(n: int) -> tuple[list[tuple[int, ...]], np.ndarray]:
    """Link permutations and, per permutation, the scenario up-set seen by each code up-set.

    A code arranged by ``perm`` puts its own link ``perm[k]`` on physical
    link ``k``; code up-set ``s`` then corresponds to physical up-set
    ``{k : perm[k] in s}``.
    """
    perms = list(itertools.permutations(range(n)))
    index = np.zeros((len(perms), 1 << n), dtype=np.int64)
    for a, perm in enumerate(perms):
        for s in range(1 << n):
            index[a, s] = sum(1 << k for k in range(n) if (s >> perm[k]) & 1)
    return perms, index


class CandidateSet:
    """Candidates with precomputed per-up-set recovery, for fast repeated evaluation.

    ``recovered[c, s, j]`` is the number of units of message j recovered by
    candidate c when exactly the links in s are up.  With ``arrange`` each
    candidate is scored on its best assignment of columns to physical
    links; use it for candidate lists that hold one ordering per multiset.
    """

    def __init__(self, items: Sequence[Candidate], m: int | None = None, arrange: bool = False):
        if not items:
            raise ValueError("candidate list is empty")
        self.items = list(items)
        if isinstance(self.items[0], RankFunction):
            self.m = self.items[0].m if m is None else m
            self.n = self.items[0].n
            self.recovered = np.stack([rf.decodability.astype(float) for rf in self.items])
            self.systematic = np.array([is_systematic_matroid(rf) for rf in self.items])
            self.labels = [f"matroid#{k}" for k in range(len(self.items))]
        else:
            self.m = max(c.max_message for c in self.items) + 1 if m is None else m
            self.n = self.items[0].n_links
            self.recovered = np.zeros((len(self.items), 1 << self.n, self.m))
            for k, code in enumerate(self.items):
                if code.n_links != self.n:
                    raise CodeError("candidates have different link counts")
                counts = code.recovered_counts
                self.recovered[k, :, :counts.shape[1]] = counts
            self.systematic = np.array([is_systematic_code(c) for c in self.items])
            self.labels = [format_code(c) for c in self.items]
        if arrange:
            self.perms, self._index = _arrangement_index(self.n)
        else:
            self.perms, self._index = [tuple(range(self.n))], np.arange(1 << self.n)[None, :]

    def __len__(self) -> int:
        return len(self.items)

    def evaluate(self, scenario: Scenario) -> tuple[np.ndarray, np.ndarray]:
        """Best payoff per candidate and the index into ``perms`` achieving it."""
        if scenario.n_links != self.n or scenario.n_messages < self.m:
            raise ValueError(f"scenario {scenario.n_messages}x{scenario.n_links} does not fit "
                             f"candidates {self.m}x{self.n}")
        values = self.recovered @ scenario.worths[: self.m]
        table = values @ upset_probs(scenario)[self._index].T
        best = table.argmax(axis=1)
        return table[np.arange(len(table)), best], best

    def payoffs(self, scenario: Scenario) -> np.ndarray:
        return self.evaluate(scenario)[0]

    def arranged(self, k: int, arrangement: int) -> Candidate:
        item = self.items[k]
        if isinstance(item, Code):
            return item.permute_links(self.perms[arrangement])
        return item


def best_candidate(candidates: CandidateSet | Sequence[Candidate], scenario: Scenario) -> tuple[list[int], float]:
    """Indices of all candidates within relative ``TIE_REL`` of the best payoff, and that payoff."""
    cands = candidates if isinstance(candidates, CandidateSet) else CandidateSet(candidates)
    pay = cands.payoffs(scenario)
    best = float(pay.max())
    tie = np.nonzero(pay >= best - TIE_REL * max(abs(best), 1e-300))[0]
    return [int(k) for k in tie], best


# ---------------------------------------------------------------------------
# Experiments

@dataclass
class CoverageReport:
    labels: list[str]
    counts: list[int]
    trials: int
    seed: int
    config: dict
    certificate_failures: int = 0
    header: str = ("outage ~ U[0,1), worth ~ U[worth_low, worth_high], capacity ~ U(0, capacity_high], "
                   "size ~ U(0, size_high]; scenarios put in canonical order before solving; "
                   f"a code counts when z_k > {USED_TOL:g}")

    @property
    def missing(self) -> list[str]:
        return [label for label, c in zip(self.labels, self.counts) if c == 0]

    def to_json(self) -> str:
        return json.dumps(asdict(self) | {"missing": self.missing}, indent=1)


def coverage_experiment(config: TrialConfig) -> CoverageReport:
    """Solve the 17-code LP on random general scenarios and count which codes each optimum uses."""
    if (config.m, config.n) != (2, 3):
        raise ValueError("the 17-code coverage experiment needs m=2, n=3")
    library = build_17_code_library()
    counts = [0] * len(library)
    failures = 0
    for t in range(config.trials):
        scenario, _, _ = canonical_order(random_general_scenario(trial_rng(config.seed, t), 2, 3, config))
        problem = build_lp(library, scenario)
        sol = solve_lp(problem)
        if check_solution(problem, sol):
            failures += 1
        for k in used_codes(sol, USED_TOL):
            counts[k] += 1
    return CoverageReport([format_code(c) for c in library.codes], counts, config.trials, config.seed,
                          asdict(config), failures)


@dataclass
class CounterexampleReport:
    config: dict
    n_candidates: int
    counterexamples: list[dict] = field(default_factory=list)
    trials_run: int = 0
    systematic_best: int = 0  # trials where some systematic candidate is in the tie set

    @property
    def summary(self) -> dict:
        return {"trials_run": self.trials_run, "candidates": self.n_candidates,
                "counterexamples": len(self.counterexamples), "systematic_best": self.systematic_best}

    def to_json(self) -> str:
        return json.dumps({"config": self.config, "summary": self.summary,
                           "counterexamples": self.counterexamples}, indent=1)


def _run_trials(config: TrialConfig, cands: CandidateSet, start: int, stop: int, canonical: bool,
                max_counterexamples: int | None):
    found, systematic_best = [], 0
    for t in range(start, stop):
        scenario = random_scenario(trial_rng(config.seed, t), config.m, config.n, config)
        if canonical:
            scenario = canonical_order(scenario)[0]
        pay, arrangement = cands.evaluate(scenario)
        best = float(pay.max())
        tie = np.nonzero(pay >= best - TIE_REL * max(abs(best), 1e-300))[0]
        if cands.systematic[tie].any():
            systematic_best += 1
            continue
        best_sys = float(pay[cands.systematic].max()) if cands.systematic.any() else 0.0
        found.append({
            "trial": t,
            "scenario": scenario_to_dict(scenario),
            "best": [cands.labels[k] for k in tie],
            "arranged": [str(cands.arranged(k, arrangement[k])) for k in tie],
            "best_indices": [int(k) for k in tie],
            "best_payoff": best,
            "best_systematic_payoff": best_sys,
            "margin": best - best_sys,
            "systematic": False,
        })
        if max_counterexamples is not None and len(found) >= max_counterexamples:
            return found, systematic_best, t + 1
    return found, systematic_best, stop


def conjecture_trial(config: TrialConfig, candidates: CandidateSet | Sequence[Candidate],
                     canonical: bool = True, max_counterexamples: int | None = None) -> CounterexampleReport:
    """Look for scenarios whose best candidates are all non-systematic.

    A trial is a counterexample only when the entire tie set (relative
    tolerance ``TIE_REL``) is non-systematic.  Scenarios are put in canonical
    order first so recorded codes read with link 1 most reliable and message
    A most valuable.  Stops early after ``max_counterexamples`` if given.
    """
    if not isinstance(candidates, CandidateSet):
        candidates = CandidateSet(candidates, config.m, arrange=isinstance(candidates[0], Code))
    cands = candidates
    found, sys_best, ran = _run_trials(config, cands, 0, config.trials, canonical, max_counterexamples)
    return CounterexampleReport(asdict(config) | {"canonical": canonical}, len(cands), found, ran, sys_best)


def hunt_counterexamples(config: TrialConfig, prune: bool = True,
                         max_counterexamples: int | None = None) -> CounterexampleReport:
    """Non-systematic search over the projective candidate codes of ``config``."""
    codes = enumerate_candidate_codes(config.m, config.n, config.field, prune=prune)
    report = conjecture_trial(config, CandidateSet(codes, config.m, arrange=True), max_counterexamples=max_counterexamples)
    report.config["prune"] = prune
    for ce in report.counterexamples:
        ce["shape"] = [classify_shape(codes[k]) for k in ce["best_indices"]]
    return report


def replay_counterexample(record: dict, candidates: CandidateSet) -> tuple[list[int], float]:
    """Re-evaluate a stored counterexample scenario against the same candidates."""
    return best_candidate(candidates, scenario_from_dict(record["scenario"]))


# ---------------------------------------------------------------------------
# Shape comparison

def _projective_columns(code: Code, m: int) -> list[tuple[int, ...]]:
    if any(n > 1 for n in code.portion_counts):
        raise CodeError("shape comparison needs one portion per message")
    cols = []
    for i in range(code.n_links):
        col = code.column(i, [Portion(j, 1) for j in range(m)]) if code.symbols[i] else [0] * m
        lead = next((x for x in col if x), 1)
        inv = pow(lead, code.q - 2, code.q)
        cols.append(tuple((x * inv) % code.q for x in col))
    return sorted(cols)


def same_up_to_link_permutation(a: Code, b: Code) -> bool:
    """Equal column multisets, with each column taken up to nonzero scaling."""
    if a.q != b.q or a.n_links != b.n_links:
        return False
    m = max(a.max_message, b.max_message) + 1
    return _projective_columns(a, m) == _projective_columns(b, m)


COUNTEREXAMPLE_SHAPES = ("A,B,A+B,A+C,B+2C", "A,C,A+B,A+C,B+2C")


def classify_shape(code: Code) -> str | None:
    """Name the known 5-link non-systematic shape ``code`` matches, if any (GF(3), alpha=2)."""
    from .codealg import parse_code

    if code.q != 3 or code.n_links != 5:
        return None
    for text in COUNTEREXAMPLE_SHAPES:
        if same_up_to_link_permutation(code, parse_code(text, 3)):
            return text
    return None


# ---------------------------------------------------------------------------
# Monte Carlo

@dataclass(frozen=True)
class McEstimate:
    mean: float
    stderr: float
    samples: int
    degenerate: bool = False  # stderr undefined for a single sample


def mc_estimate_payoff(code: Code, scenario: Scenario, samples: int, seed: int,
                       chunk: int = 1 << 18) -> McEstimate:
    """Sample link states independently and average the recovered worth."""
    if samples < 1:
        raise ValueError("samples must be >= 1")
    rng = np.random.default_rng(seed)
    values = upset_values(code, scenario)
    success = scenario.success
    weights = 1 << np.arange(scenario.n_links)
    mean = m2 = 0.0
    done = 0
    while done < samples:
        size = min(chunk, samples - done)
        up = rng.random((size, scenario.n_links)) < success
        got = values[up.astype(np.int64) @ weights]
        # merge chunk moments into the running ones
        c_mean = float(got.mean())
        c_m2 = float(((got - c_mean) ** 2).sum())
        delta = c_mean - mean
        total = done + size
        mean += delta * size / total
        m2 += c_m2 + delta * delta * done * size / total
        done = total
    if samples == 1:
        return McEstimate(mean, 0.0, 1, degenerate=True)
    return McEstimate(mean, math.sqrt(m2 / (samples - 1) / samples), samples)


def random_code(rng: np.random.Generator, m: int, n: int, q: int) -> Code:
    """Random single-portion code: each link gets a random nonzero column."""
    cols = []
    for _ in range(n):
        col = np.zeros(m, dtype=int)
        while not col.any():
            col = rng.integers(0, q, m)
        cols.append(col)
    return from_columns(cols, q)


def random_code_scenario_pairs(count: int, seed: int) -> list[tuple[Code, Scenario]]:
    """Seeded (code, scenario) pairs with 1-3 messages, 2-4 links, GF(2) or GF(3)."""
    pairs = []
    for k in range(count):
        rng = trial_rng(seed, k)
        m, n, q = int(rng.integers(1, 4)), int(rng.integers(2, 5)), int(rng.choice([2, 3]))
        code = random_code(rng, m, n, q)
        config = TrialConfig(m, n, 1, seed)
        pairs.append((code, random_scenario(rng, m, n, config)))
    return pairs
