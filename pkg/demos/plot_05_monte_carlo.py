"""
Checking payoffs by simulation
==============================

Draw link states at random and average the recovered worth.  The exact
payoff should sit within a few standard errors.
"""

from paralink import code_payoff, make_scenario, parse_code
from paralink.experiments import mc_estimate_payoff

code = parse_code("A,B,A+B,A+C,B+2C", q=3)
scenario = make_scenario([0.3, 0.25, 0.4, 0.1, 0.5], [5.0, 3.0, 1.0])

exact = code_payoff(code, scenario)
for samples in [100, 10_000, 1_000_000]:
    est = mc_estimate_payoff(code, scenario, samples, seed=7)
    print(f"{samples:>9d}  mean {est.mean:.5f}  stderr {est.stderr:.5f}  z {(est.mean - exact) / est.stderr:+.2f}")
print("exact    ", round(exact, 5))
