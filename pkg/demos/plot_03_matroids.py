"""
Rank functions instead of codes
===============================

A code only matters through which link sets decode which messages.  That
information is a matroid rank function on messages plus links, and rank
functions can be enumerated directly.
"""

from paralink import (enumerate_rank_functions, is_systematic_matroid, make_scenario, matroid_of_code,
                      matroid_payoff, parse_code, validate_rank)

rf = matroid_of_code(parse_code("A,B,A+B"))
print("valid:", validate_rank(rf).ok, " systematic:", is_systematic_matroid(rf))

# Same payoff as evaluating the code itself
scenario = make_scenario([0.1, 0.2, 0.3], [2.0, 1.0])
print("payoff:", matroid_payoff(rf, scenario))

# How many rank functions exist on small ground sets?
for m, n in [(1, 2), (2, 2), (2, 3), (3, 3)]:
    all_rf = list(enumerate_rank_functions(m, n, check=False))
    distinct = list(enumerate_rank_functions(m, n, dedup=True, check=False))
    print(f"m={m} n={n}: {len(all_rf)} functions, {len(distinct)} up to link relabeling")

# Most of them are non-systematic, so systematic optima are not automatic
rfs = list(enumerate_rank_functions(2, 3))
print(sum(not is_systematic_matroid(r) for r in rfs), "of", len(rfs), "are non-systematic")
