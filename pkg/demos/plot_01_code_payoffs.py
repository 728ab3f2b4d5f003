"""
Expected payoff of a code
=========================

Three links that work with probability 0.9, 0.8 and 0.7.  Message A is
worth 2 per unit, message B is worth 1.
"""

from paralink import code_payoff, make_scenario, parse_code
from paralink.codealg import payoff_breakdown

scenario = make_scenario(outage=[0.1, 0.2, 0.3], worths=[2.0, 1.0])

# Repeat A everywhere, or mix in B with a parity link
for text in ["A,A,A", "A,B,-", "A,B,A+B", "A1,A2,A1+A2"]:
    print(f"{text:12s} {code_payoff(parse_code(text), scenario):.4f}")

# Where does the parity code's payoff come from?  One row per up-set
parity = parse_code("A,B,A+B")
for s, prob, got, value in payoff_breakdown(parity, scenario):
    bits = "".join("1" if s >> i & 1 else "0" for i in range(3))
    print(bits, f"{prob:.3f}", ",".join(p.label(show_index=False) for p in got) or "-", value)
