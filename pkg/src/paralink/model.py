"""Problem instances: parallel links, prioritized messages, outage patterns.

Links fail independently and stay up or down for a whole communication
attempt.  An *up-set* is the exact set of working links, encoded as an
integer bitmask (bit ``i`` set means link ``i`` is up).
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Iterable

import numpy as np

MAX_LINKS = 24


class ScenarioError(ValueError):
    """Raised when a scenario violates a domain invariant."""


@dataclass(frozen=True)
class LinkSpec:
    capacity: float
    outage_prob: float

    @property
    def success_prob(self) -> float:
        return 1.0 - self.outage_prob


@dataclass(frozen=True)
class MessageSpec:
    size: float
    worth: float  # per unit size


@dataclass(frozen=True)
class Scenario:
    links: tuple[LinkSpec, ...]
    messages: tuple[MessageSpec, ...]

    @property
    def n_links(self) -> int:
        return len(self.links)

    @property
    def n_messages(self) -> int:
        return len(self.messages)

    @property
    def success(self) -> np.ndarray:
        return np.array([link.success_prob for link in self.links])

    @property
    def outage(self) -> np.ndarray:
        return np.array([link.outage_prob for link in self.links])

    @property
    def capacities(self) -> np.ndarray:
        return np.array([link.capacity for link in self.links])

    @property
    def worths(self) -> np.ndarray:
        return np.array([msg.worth for msg in self.messages])

    @property
    def sizes(self) -> np.ndarray:
        return np.array([msg.size for msg in self.messages])

    def with_worths(self, worths: Iterable[float]) -> "Scenario":
        msgs = tuple(MessageSpec(1.0, float(w)) for w in worths)
        return Scenario(self.links, msgs)


def make_scenario(outage: Iterable[float], worths: Iterable[float],
                  capacities: Iterable[float] | None = None,
                  sizes: Iterable[float] | None = None) -> Scenario:
    """Build and validate a scenario; capacities and sizes default to 1."""
    outage = [float(p) for p in outage]
    worths = [float(w) for w in worths]
    capacities = [1.0] * len(outage) if capacities is None else [float(c) for c in capacities]
    sizes = [1.0] * len(worths) if sizes is None else [float(s) for s in sizes]
    if len(capacities) != len(outage) or len(sizes) != len(worths):
        raise ScenarioError("length mismatch between link/message parameter lists")
    raw = Scenario(
        tuple(LinkSpec(c, p) for c, p in zip(capacities, outage)),
        tuple(MessageSpec(s, w) for s, w in zip(sizes, worths)),
    )
    return validate_scenario(raw)


def validate_scenario(raw: Any) -> Scenario:
    """Return ``raw`` as a Scenario if every invariant holds, else raise ScenarioError."""
    links = tuple(raw.links)
    messages = tuple(raw.messages)
    if not links:
        raise ScenarioError("scenario needs at least one link")
    if not messages:
        raise ScenarioError("scenario needs at least one message")
    if len(links) > MAX_LINKS:
        raise ScenarioError(f"{len(links)} links exceeds the limit of {MAX_LINKS}")
    for i, link in enumerate(links):
        p, c = link.outage_prob, link.capacity
        if not (np.isfinite(p) and 0.0 <= p <= 1.0):
            raise ScenarioError(f"link {i}: outage_prob {p!r} not in [0, 1]")
        if not (np.isfinite(c) and c >= 0.0):
            raise ScenarioError(f"link {i}: capacity {c!r} must be a nonnegative number")
    for j, msg in enumerate(messages):
        if not (np.isfinite(msg.size) and msg.size >= 0.0):
            raise ScenarioError(f"message {j}: size {msg.size!r} must be a nonnegative number")
        if not (np.isfinite(msg.worth) and msg.worth >= 0.0):
            raise ScenarioError(f"message {j}: worth {msg.worth!r} must be a nonnegative number")
    if isinstance(raw, Scenario) and isinstance(raw.links, tuple) and isinstance(raw.messages, tuple):
        return raw
    return Scenario(links, messages)


def upset_prob(scenario: Scenario, s: int) -> float:
    """Probability that exactly the links in bitmask ``s`` are up."""
    n = scenario.n_links
    if s < 0 or s >> n:
        raise ValueError(f"up-set {s:#b} has bits outside {n} links")
    prob = 1.0
    for i, link in enumerate(scenario.links):
        prob *= link.success_prob if (s >> i) & 1 else link.outage_prob
    return prob


def upset_probs(scenario: Scenario) -> np.ndarray:
    """Vector of :func:`upset_prob` over all ``2**N`` bitmasks, indexed by mask."""
    probs = np.ones(1)
    # link i doubles the table; masks with bit i set occupy the upper half
    for link in scenario.links:
        probs = np.concatenate([probs * link.outage_prob, probs * link.success_prob])
    return probs


def canonical_order(scenario: Scenario) -> tuple[Scenario, tuple[int, ...], tuple[int, ...]]:
    """Sort links by increasing outage probability and messages by decreasing worth.

    Returns the reindexed scenario and the permutations used; ``link_perm[k]``
    is the original index of the link now at position ``k`` (same for
    messages).  Sorting is stable.
    """
    link_perm = tuple(sorted(range(scenario.n_links), key=lambda i: scenario.links[i].outage_prob))
    msg_perm = tuple(sorted(range(scenario.n_messages), key=lambda j: -scenario.messages[j].worth))
    reordered = Scenario(
        tuple(scenario.links[i] for i in link_perm),
        tuple(scenario.messages[j] for j in msg_perm),
    )
    return reordered, link_perm, msg_perm


_LINK_FIELDS = {"capacity", "outage_prob"}
_MESSAGE_FIELDS = {"size", "worth"}


def scenario_from_dict(data: Any) -> Scenario:
    """Parse the scenario JSON object; unknown or missing fields are rejected."""
    if not isinstance(data, dict):
        raise ScenarioError("scenario must be a JSON object")
    extra = set(data) - {"links", "messages"}
    if extra:
        raise ScenarioError(f"unknown scenario field(s): {sorted(extra)}")
    links, messages = [], []
    for kind, fields, out in (("links", _LINK_FIELDS, links), ("messages", _MESSAGE_FIELDS, messages)):
        items = data.get(kind)
        if not isinstance(items, list):
            raise ScenarioError(f"field {kind!r} must be a list")
        for idx, item in enumerate(items):
            if not isinstance(item, dict):
                raise ScenarioError(f"{kind}[{idx}] must be an object")
            unknown = set(item) - fields
            if unknown:
                raise ScenarioError(f"{kind}[{idx}]: unknown field(s) {sorted(unknown)}")
            missing = fields - set(item)
            if missing:
                raise ScenarioError(f"{kind}[{idx}]: missing field(s) {sorted(missing)}")
            vals = {}
            for name in fields:
                value = item[name]
                if isinstance(value, bool) or not isinstance(value, (int, float)):
                    raise ScenarioError(f"{kind}[{idx}].{name} must be a number")
                vals[name] = float(value)
            out.append(LinkSpec(**vals) if kind == "links" else MessageSpec(**vals))
    return validate_scenario(Scenario(tuple(links), tuple(messages)))


def scenario_to_dict(scenario: Scenario) -> dict:
    return {
        "links": [{"capacity": l.capacity, "outage_prob": l.outage_prob} for l in scenario.links],
        "messages": [{"size": m.size, "worth": m.worth} for m in scenario.messages],
    }


def load_scenario(path: str | Path) -> Scenario:
    text = Path(path).read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"{path}: invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    return scenario_from_dict(data)
