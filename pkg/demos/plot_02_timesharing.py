"""
Timesharing among seventeen codes
=================================

With general link capacities and message sizes no single code is best.
The linear program splits capacity among the codes of the library.
"""

import numpy as np

from paralink import build_17_code_library, build_lp, make_scenario, solve_lp, used_codes
from paralink.codealg import format_code
from paralink.lpopt import check_solution

library = build_17_code_library()
scenario = make_scenario(outage=[0.1, 0.2, 0.3], worths=[2.0, 1.0],
                         capacities=[1.0, 0.6, 0.8], sizes=[0.7, 1.5])

problem = build_lp(library, scenario)
solution = solve_lp(problem)
print("objective", round(solution.objective, 6))
for k in used_codes(solution):
    print(f"  {format_code(library.codes[k]):12s} z = {solution.z[k]:.4f}")

# The final tableau certifies optimality: feasible, no improving column
print("certificate problems:", check_solution(problem, solution) or "none")

# Sweep the reliability of the third link and watch the mix change
for p3 in np.linspace(0.05, 0.95, 4):
    sc = make_scenario([0.1, 0.2, p3], [2.0, 1.0], capacities=[1.0, 0.6, 0.8], sizes=[0.7, 1.5])
    sol = solve_lp(build_lp(library, sc))
    print(f"outage3={p3:.2f}", [format_code(library.codes[k]) for k in used_codes(sol)])
