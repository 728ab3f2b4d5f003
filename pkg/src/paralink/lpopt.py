"""Timesharing among a library of codes as a linear program.

Maximize ``v @ z`` subject to ``K @ z <= c``, ``L @ z <= s``, ``z >= 0``,
where column ``k`` of ``K``/``L`` is the link/message usage of one unit of
code ``k`` and ``v[k]`` its expected payoff.  Solved with a dense tableau
simplex under Bland's rule; problem sizes are tens of columns.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .codealg import Code, CodeError, check_field, code_payoff, format_code, parse_code
from .model import Scenario

FEAS_TOL = 1e-9
COST_TOL = 1e-9
PIVOT_FLOOR = 1e-12


class NumericalError(RuntimeError):
    """The simplex could not find a usable pivot."""


@dataclass(frozen=True)
class CodeLibrary:
    q: int
    codes: tuple[Code, ...]

    def __post_init__(self):
        check_field(self.q)
        if not self.codes:
            raise CodeError("code library is empty")
        n = self.codes[0].n_links
        for code in self.codes:
            if code.n_links != n:
                raise CodeError(f"library mixes {n}-link and {code.n_links}-link codes")
            if code.q != self.q:
                raise CodeError(f"code {format_code(code)} is over GF({code.q}), library over GF({self.q})")

    @property
    def n_links(self) -> int:
        return self.codes[0].n_links

    def __len__(self) -> int:
        return len(self.codes)

    @classmethod
    def from_texts(cls, texts: Sequence[str], q: int = 2) -> "CodeLibrary":
        return cls(q, tuple(parse_code(t, q) for t in texts))

    @classmethod
    def from_json(cls, data: dict) -> "CodeLibrary":
        if not isinstance(data, dict) or set(data) != {"field", "codes"}:
            raise CodeError('code library JSON must be an object with exactly "field" and "codes"')
        if not isinstance(data["codes"], list) or not all(isinstance(t, str) for t in data["codes"]):
            raise CodeError('"codes" must be a list of code strings')
        return cls.from_texts(data["codes"], data["field"])

    def to_json(self) -> dict:
        return {"field": self.q, "codes": [format_code(c) for c in self.codes]}


@dataclass(frozen=True)
class LPProblem:
    K: np.ndarray
    L: np.ndarray
    v: np.ndarray
    c: np.ndarray
    s: np.ndarray

    def __post_init__(self):
        n_c = self.v.shape[0]
        if self.K.shape != (self.c.shape[0], n_c) or self.L.shape != (self.s.shape[0], n_c):
            raise ValueError(f"LP shapes disagree: K{self.K.shape} L{self.L.shape} v{self.v.shape} "
                             f"c{self.c.shape} s{self.s.shape}")
        for name in ("K", "L", "v", "c", "s"):
            arr = getattr(self, name)
            if not np.all(np.isfinite(arr)) or np.any(arr < 0):
                raise ValueError(f"LP entries of {name} must be finite and nonnegative")

    @property
    def A(self) -> np.ndarray:
        return np.vstack([self.K, self.L])

    @property
    def b(self) -> np.ndarray:
        return np.concatenate([self.c, self.s])


@dataclass(frozen=True)
class LPSolution:
    z: np.ndarray
    objective: float
    status: str  # "optimal" | "unbounded-guard" | "infeasible-guard"
    reduced_costs: np.ndarray
    duals: np.ndarray
    iterations: int = 0


def build_lp(library: CodeLibrary, scenario: Scenario) -> LPProblem:
    if library.n_links != scenario.n_links:
        raise CodeError(f"library codes have {library.n_links} links, scenario has {scenario.n_links}")
    n_c = len(library)
    K = np.zeros((scenario.n_links, n_c))
    L = np.zeros((scenario.n_messages, n_c))
    v = np.zeros(n_c)
    for k, code in enumerate(library.codes):
        K[list(code.used_links), k] = 1.0
        for j, count in enumerate(code.portion_counts):
            if count:
                if j >= scenario.n_messages:
                    raise CodeError(f"code {format_code(code)} uses message {j} beyond the scenario's "
                                    f"{scenario.n_messages}")
                L[j, k] = count
        v[k] = code_payoff(code, scenario)
    return LPProblem(K, L, v, scenario.capacities, scenario.sizes)


def solve_lp(problem: LPProblem) -> LPSolution:
    """Optimal vertex of the timesharing LP, certified by its reduced costs."""
    A, b, v = problem.A, problem.b, problem.v
    rows, cols = A.shape
    # tableau [A | I | b]; basis starts at the slacks since b >= 0
    T = np.hstack([A, np.eye(rows), b[:, None]]).astype(float)
    cost = np.concatenate([v, np.zeros(rows)])
    basis = list(range(cols, cols + rows))
    iterations = 0
    status = "optimal"
    limit = 50 * (rows + cols) + 1000
    while True:
        reduced = cost - cost[basis] @ T[:, :-1]
        scale = 1.0 + np.abs(cost)
        entering = next((j for j in range(cols + rows) if reduced[j] > COST_TOL * scale[j]), None)
        if entering is None:
            break
        column = T[:, entering]
        candidates = [i for i in range(rows) if column[i] > PIVOT_FLOOR]
        if not candidates:
            if np.any((column > 0) & (column <= PIVOT_FLOOR)):
                raise NumericalError(f"only sub-floor pivots left in column {entering}")
            status = "unbounded-guard"
            break
        ratios = [T[i, -1] / column[i] for i in candidates]
        best = min(ratios)
        tied = [i for i, ratio in zip(candidates, ratios) if ratio <= best + FEAS_TOL * (1.0 + abs(best))]
        leave = min(tied, key=lambda i: basis[i])
        _pivot(T, leave, entering)
        basis[leave] = entering
        iterations += 1
        if iterations > limit:
            raise NumericalError("simplex exceeded its iteration limit (cycling?)")

    x = np.zeros(cols + rows)
    for i, j in enumerate(basis):
        x[j] = T[i, -1]
    z = np.maximum(x[:cols], 0.0)
    reduced = cost - cost[basis] @ T[:, :-1]
    duals = -reduced[cols:]
    if status != "optimal":
        return LPSolution(z, float("inf"), status, reduced[:cols], duals, iterations)
    return LPSolution(z, float(v @ z), status, reduced[:cols], duals, iterations)


def _pivot(T: np.ndarray, row: int, col: int) -> None:
    T[row] /= T[row, col]
    for i in range(T.shape[0]):
        if i != row and T[i, col] != 0.0:
            T[i] -= T[i, col] * T[row]
    T[:, col] = 0.0
    T[row, col] = 1.0


def check_solution(problem: LPProblem, sol: LPSolution) -> list[str]:
    """Certificate failures of a solved LP (empty list when all checks pass)."""
    problems = []
    z = sol.z
    if np.any(z < -1e-12):
        problems.append("negative z")
    if np.any(problem.K @ z > problem.c + FEAS_TOL * (1 + np.abs(problem.c))):
        problems.append("link capacity exceeded")
    if np.any(problem.L @ z > problem.s + FEAS_TOL * (1 + np.abs(problem.s))):
        problems.append("message size exceeded")
    obj = float(problem.v @ z)
    if abs(obj - sol.objective) > FEAS_TOL * max(1.0, abs(obj)):
        problems.append("objective does not equal v.z")
    if sol.status == "optimal" and np.any(sol.reduced_costs > COST_TOL * (1 + np.abs(problem.v))):
        problems.append("positive reduced cost at optimum")
    if sol.status == "optimal" and np.any(sol.duals < -COST_TOL):
        problems.append("negative dual value")
    return problems


def used_codes(solution: LPSolution, tol: float = 1e-6) -> list[int]:
    """Indices with ``z_k > tol``, largest share first (ties by index)."""
    idx = [k for k in range(len(solution.z)) if solution.z[k] > tol]
    return sorted(idx, key=lambda k: (-solution.z[k], k))


LIBRARY_17 = (
    "A,-,-", "-,A,-", "-,-,A", "A,A,-", "A,-,A", "-,A,A", "A,A,A", "A1,A2,A1+A2",
    "B,-,-", "-,B,-", "-,-,B", "B,B,-", "B,-,B", "-,B,B", "B,B,B", "B1,B2,B1+B2",
    "A,B,A+B",
)


def build_17_code_library() -> CodeLibrary:
    """The two-message, three-link library (links in decreasing reliability, A worth more than B)."""
    return CodeLibrary.from_texts(LIBRARY_17, q=2)


def solution_to_json(solution: LPSolution, library: CodeLibrary, tol: float = 1e-6) -> str:
    used = [{"code": format_code(library.codes[k]), "z": float(solution.z[k])}
            for k in used_codes(solution, tol)]
    return json.dumps({"objective": solution.objective, "z": [float(x) for x in solution.z],
                       "used": used, "status": solution.status})
