"""Prioritized messages over parallel unreliable links: codes, matroids, timesharing LPs."""
from .codealg import (Code, CodeError, Portion, code_payoff, format_code, is_systematic_code,
                      matroid_of_code, parse_code, recoverable_portions, reduce_code)
from .lpopt import CodeLibrary, LPProblem, LPSolution, build_17_code_library, build_lp, solve_lp, used_codes
from .matroid import (GroundSet, RankFunction, decodable, enumerate_rank_functions, is_systematic_matroid,
                      matroid_payoff, messages_covered, validate_rank)
from .model import (LinkSpec, MessageSpec, Scenario, ScenarioError, canonical_order, load_scenario,
                    make_scenario, upset_prob, upset_probs, validate_scenario)

__version__ = "0.1.0"

__all__ = [
    "Code", "CodeError", "Portion", "code_payoff", "format_code", "is_systematic_code", "matroid_of_code",
    "parse_code", "recoverable_portions", "reduce_code",
    "CodeLibrary", "LPProblem", "LPSolution", "build_17_code_library", "build_lp", "solve_lp", "used_codes",
    "GroundSet", "RankFunction", "decodable", "enumerate_rank_functions", "is_systematic_matroid",
    "matroid_payoff", "messages_covered", "validate_rank",
    "LinkSpec", "MessageSpec", "Scenario", "ScenarioError", "canonical_order", "load_scenario", "make_scenario",
    "upset_prob", "upset_probs", "validate_scenario",
]
