"""Command-line entry point.

Exit codes: 0 success, 1 usage error, 2 invalid input, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import codealg, experiments, lpopt, matroid, model
from .codealg import CodeError
from .lpopt import NumericalError
from .matroid import MatroidError
from .model import ScenarioError

EXIT_USAGE, EXIT_INPUT, EXIT_NUMERIC = 1, 2, 3


def fmt(x: float) -> str:
    return f"{x:.12g}"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _upset_label(s: int, n: int) -> str:
    return "".join("1" if (s >> i) & 1 else "0" for i in range(n))


def cmd_eval_code(args) -> int:
    scenario = model.load_scenario(args.scenario)
    code = codealg.parse_code(args.code, args.field)
    print(fmt(codealg.code_payoff(code, scenario)))
    if args.breakdown:
        print("upset\tprob\trecovered\tvalue")
        for s, prob, got, value in codealg.payoff_breakdown(code, scenario):
            names = ",".join(p.label(code.portion_counts[p.message] > 1) for p in got) or "-"
            print(f"{_upset_label(s, code.n_links)}\t{fmt(prob)}\t{names}\t{fmt(value)}")
    return 0


def cmd_optimize(args) -> int:
    scenario = model.load_scenario(args.scenario)
    if args.codes:
        library = lpopt.CodeLibrary.from_json(_load_json(args.codes))
    elif (scenario.n_links, scenario.n_messages) == (3, 2):
        library = lpopt.build_17_code_library()
    else:
        raise CodeError("--codes is required unless the scenario has 3 links and 2 messages")
    solution = lpopt.solve_lp(lpopt.build_lp(library, scenario))
    if solution.status != "optimal":
        print(lpopt.solution_to_json(solution, library, args.tol))
        return EXIT_NUMERIC
    print(json.dumps(_rounded(json.loads(lpopt.solution_to_json(solution, library, args.tol)))))
    return 0


def cmd_enum_matroids(args) -> int:
    out = open(args.out, "w") if args.out else sys.stdout
    try:
        for rf in matroid.enumerate_rank_functions(args.m, args.n, dedup=args.dedup, jobs=args.jobs):
            out.write(matroid.rank_function_to_json(rf) + "\n")
    finally:
        if args.out:
            out.close()
    return 0


def _config(args, m, n) -> experiments.TrialConfig:
    return experiments.TrialConfig(m=m, n=n, trials=args.trials, seed=args.seed, worth_low=args.worth_low,
                                   worth_high=args.worth_high, field=getattr(args, "field", 2),
                                   capacity_high=getattr(args, "capacity_high", 2.0),
                                   size_high=getattr(args, "size_high", 2.0))


def _emit(text: str, path: str | None) -> None:
    if path:
        Path(path).write_text(text + "\n")
    else:
        print(text)


def cmd_coverage(args) -> int:
    report = experiments.coverage_experiment(_config(args, 2, 3))
    _emit(report.to_json(), args.out)
    if report.missing:
        print(f"codes never used (seed {args.seed}): {', '.join(report.missing)}", file=sys.stderr)
    return 0


def cmd_conjecture(args) -> int:
    config = _config(args, args.m, args.n)
    if args.matroids:
        cands = experiments.CandidateSet(list(matroid.enumerate_rank_functions(args.m, args.n, jobs=args.jobs)))
    else:
        codes = experiments.enumerate_candidate_codes(args.m, args.n, args.field, prune=args.prune)
        cands = experiments.CandidateSet(codes, args.m, arrange=True)
    report = experiments.conjecture_trial(config, cands, max_counterexamples=args.max_found)
    _emit(report.to_json(), args.out)
    return 0


def cmd_hunt(args) -> int:
    report = experiments.hunt_counterexamples(_config(args, args.m, args.n), prune=not args.no_prune,
                                              max_counterexamples=args.max_found)
    _emit(report.to_json(), args.out)
    return 0


def cmd_mc_validate(args) -> int:
    if (args.code is None) != (args.scenario is None):
        raise CodeError("--code and --scenario go together")
    if args.code is not None:
        pairs = [(codealg.parse_code(args.code, args.field), model.load_scenario(args.scenario))]
    else:
        pairs = experiments.random_code_scenario_pairs(args.pairs, args.seed)
    print("code\tanalytic\tmc_mean\tmc_stderr\tz")
    for k, (code, scenario) in enumerate(pairs):
        exact = codealg.code_payoff(code, scenario)
        est = experiments.mc_estimate_payoff(code, scenario, args.samples, args.seed + k)
        z = (est.mean - exact) / est.stderr if est.stderr > 0 else 0.0
        print(f"{codealg.format_code(code)}\t{fmt(exact)}\t{fmt(est.mean)}\t{fmt(est.stderr)}\t{fmt(z)}")
    return 0


def cmd_check_systematic(args) -> int:
    code = codealg.parse_code(args.code, args.field)
    print("true" if codealg.is_systematic_code(code) else "false")
    for portion in codealg.non_systematic_portions(code):
        print(f"never sent alone: {portion.label(code.portion_counts[portion.message] > 1)}")
    return 0


def _load_json(path: str):
    try:
        return json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"{path}: invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc


def _rounded(obj):
    if isinstance(obj, float):
        return float(fmt(obj))
    if isinstance(obj, list):
        return [_rounded(x) for x in obj]
    if isinstance(obj, dict):
        return {k: _rounded(v) for k, v in obj.items()}
    return obj


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="paralink", description="Coding and timesharing over parallel unreliable links.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def trials_args(p, m=None, n=None, field=2):
        p.add_argument("--trials", type=int, required=True)
        p.add_argument("--seed", type=int, required=True)
        p.add_argument("--worth-low", type=float, default=1.0)
        p.add_argument("--worth-high", type=float, default=100.0)
        p.add_argument("--out")
        if m is not None:
            p.add_argument("-m", type=int, default=m)
            p.add_argument("-n", type=int, default=n)
            p.add_argument("--field", type=int, default=field)
            p.add_argument("--max-found", type=int)

    p = sub.add_parser("eval-code", help="expected payoff of one code")
    p.add_argument("--scenario", required=True)
    p.add_argument("--code", required=True)
    p.add_argument("--field", type=int, default=2)
    p.add_argument("--breakdown", action="store_true")
    p.set_defaults(func=cmd_eval_code)

    p = sub.add_parser("optimize", help="optimal timesharing LP")
    p.add_argument("--scenario", required=True)
    p.add_argument("--codes")
    p.add_argument("--tol", type=float, default=1e-6)
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("enum-matroids", help="stream rank functions as JSONL")
    p.add_argument("-m", type=int, required=True)
    p.add_argument("-n", type=int, required=True)
    p.add_argument("--dedup", action="store_true")
    p.add_argument("--out")
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_enum_matroids)

    p = sub.add_parser("coverage", help="which 17-library codes random optima use")
    trials_args(p)
    p.add_argument("--capacity-high", type=float, default=2.0)
    p.add_argument("--size-high", type=float, default=2.0)
    p.set_defaults(func=cmd_coverage)

    p = sub.add_parser("conjecture", help="systematic-code conjecture trials")
    trials_args(p, m=3, n=4, field=2)
    p.add_argument("--matroids", action="store_true", help="use all rank functions as candidates")
    p.add_argument("--prune", action="store_true")
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_conjecture)

    p = sub.add_parser("hunt", help="search for non-systematic optimal codes")
    trials_args(p, m=3, n=5, field=3)
    p.add_argument("--no-prune", action="store_true")
    p.set_defaults(func=cmd_hunt)

    p = sub.add_parser("mc-validate", help="Monte Carlo check of analytic payoffs")
    p.add_argument("--samples", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--pairs", type=int, default=10)
    p.add_argument("--code")
    p.add_argument("--scenario")
    p.add_argument("--field", type=int, default=2)
    p.set_defaults(func=cmd_mc_validate)

    p = sub.add_parser("check-systematic", help="is a code systematic")
    p.add_argument("--code", required=True)
    p.add_argument("--field", type=int, default=2)
    p.set_defaults(func=cmd_check_systematic)
    return parser


def run(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ScenarioError, CodeError, MatroidError, ValueError, OSError) as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_INPUT


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
