"""
Is the best code always systematic?
===================================

With four links, random scenarios keep finding systematic optima.  With
five links over GF(3), non-systematic codes start to win outright.
"""

from paralink.experiments import CandidateSet, TrialConfig, conjecture_trial, enumerate_candidate_codes

codes = enumerate_candidate_codes(3, 4, 2)
report = conjecture_trial(TrialConfig(m=3, n=4, trials=300, seed=1), CandidateSet(codes, 3, arrange=True))
print("4 links:", report.summary)

# Five links, GF(3), reducible codes dropped; stop at the first hit
codes = enumerate_candidate_codes(3, 5, 3, prune=True)
cands = CandidateSet(codes, 3, arrange=True)
report = conjecture_trial(TrialConfig(m=3, n=5, trials=20_000, seed=2024, field=3), cands, max_counterexamples=1)
print("5 links:", report.summary)
for ce in report.counterexamples:
    print("  trial", ce["trial"], "best", ce["arranged"], f"margin {ce['margin']:.3g}")
    print("  outage", [round(l["outage_prob"], 3) for l in ce["scenario"]["links"]])
    print("  worths", [round(m["worth"], 2) for m in ce["scenario"]["messages"]])
