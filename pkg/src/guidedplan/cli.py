"""Command line: solve, validate, corrupt, bench.

Exit codes: 0 success, 1 planning failure or invalid plan, 2 bad input, 3 transport error.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import bench
from .advisor import AdvisorError, LLMAdvisor
from .corpus import manifest
from .llm import LLMError
from .pddl import (PDDLError, corrupt_domain, load_domain, load_problem, parse_plan,
                   serialize_domain)
from .solver import MODES, SOLVED, SolverConfig, run_ablation
from .strips import ModelError, validate

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_TRANSPORT = 0, 1, 2, 3


class InputError(Exception):
    pass


def _floats(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _names(text: str) -> list[str]:
    return [x.strip() for x in text.split(",") if x.strip()]


def _load(domain_path, problem_path=None):
    for p in (domain_path, problem_path):
        if p is not None and not Path(p).is_file():
            raise InputError(f"file not found: {p}")
    try:
        domain = load_domain(domain_path)
        problem = load_problem(problem_path, domain) if problem_path else None
    except (PDDLError, ModelError) as e:
        raise InputError(f"{problem_path or domain_path}: {e}") from e
    return domain, problem


def cmd_solve(args) -> int:
    _, problem = _load(args.domain, args.problem)
    try:
        advisor = bench.make_advisor(args.advisor)
    except (ValueError, OSError, AdvisorError) as e:
        raise InputError(str(e)) from e
    config = SolverConfig(kappa0=args.kappa0, max_restarts=args.restarts,
                          max_levels=args.max_levels, memoize=args.memoize, seed=args.seed,
                          leveloff=not args.no_leveloff, timeout=args.timeout)
    result = run_ablation(problem, advisor, config, args.mode)
    if args.transcript and isinstance(advisor, LLMAdvisor):
        advisor.dump_transcripts(args.transcript)
    m = result.metrics
    print(f"outcome={result.outcome} layers={result.layers} attempts={len(result.attempts)} "
          f"expansion_actions={m.expansion_actions} mutex_pairs={m.mutex_pairs} "
          f"dfs_nodes={m.dfs_nodes} advisor_calls={m.advisor_calls} "
          f"wall_ms={m.wall_time * 1000:.1f}", file=sys.stderr)
    for e in result.errors:
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
    if result.outcome == SOLVED:
        if args.format == "json":
            print(json.dumps(dict(result.plan.to_json(), metrics=m.to_json()), indent=2))
        else:
            sys.stdout.write(result.plan.to_text())
        return EXIT_OK
    if any(isinstance(e, LLMError) for e in result.errors):
        return EXIT_TRANSPORT
    return EXIT_FAIL


def cmd_validate(args) -> int:
    _, problem = _load(args.domain, args.problem)
    if not Path(args.plan).is_file():
        raise InputError(f"file not found: {args.plan}")
    try:
        plan = parse_plan(Path(args.plan).read_text(encoding="utf-8"), problem)
    except (PDDLError, ModelError) as e:
        raise InputError(f"{args.plan}: {e}") from e
    verdict = validate(problem, plan)
    if verdict.valid:
        print(f"valid ({len(plan)} layers, {len(plan.actions)} actions)")
        return EXIT_OK
    print(f"invalid at layer {verdict.failed_layer}: {verdict.reason}")
    return EXIT_FAIL


def cmd_corrupt(args) -> int:
    domain, _ = _load(args.domain)
    if not 0 <= args.proportion <= 1:
        raise InputError("--proportion must lie in [0, 1]")
    corrupted, report = corrupt_domain(domain, args.proportion, args.seed)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(serialize_domain(corrupted), encoding="utf-8")
    sidecar = out.with_name(out.stem + ".report.json")
    sidecar.write_text(report.dumps(), encoding="utf-8")
    print(f"removed {len(report.removed)} of {report.total} condition literals -> {out}")
    return EXIT_OK


def cmd_bench(args) -> int:
    try:
        suite = bench.load_suite(args.suite)
    except FileNotFoundError as e:
        raise InputError(str(e)) from e
    for m in args.modes:
        if m not in MODES:
            raise InputError(f"unknown mode {m}")
    bounds = None
    if args.depth_bound:
        bounds = {k: v["optimal_layers"] for k, v in manifest().items()}
    jobs = bench.plan_jobs(suite, args.modes, args.advisors, args.repeats,
                           args.corrupt_proportions, args.seed, args.kappa0, args.max_levels,
                           args.restarts, args.timeout, bounds)
    results = bench.run_bench(jobs, args.jobs)
    meta = {k: v for k, v in vars(args).items() if k != "func"}
    paths = bench.write_outputs(args.out, results, meta)
    sys.stdout.write(bench.summary_to_csv(bench.summarize(r for r, _ in results)))
    print(f"wrote {paths['csv']} ({len(results)} rows)", file=sys.stderr)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="guidedplan", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    def solver_flags(p):
        p.add_argument("--kappa0", type=float, default=0.9)
        p.add_argument("--max-levels", type=int, default=15)
        p.add_argument("--restarts", type=int, default=10)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--timeout", type=float, default=None,
                       help="seconds per solve; overruns count as failures")

    p = sub.add_parser("solve", help="solve one problem and print the layered plan")
    p.add_argument("--domain", required=True)
    p.add_argument("--problem", required=True)
    p.add_argument("--advisor", default="heuristic",
                   help="passthrough | heuristic | reject-all | llm | fixture:PATH")
    p.add_argument("--mode", choices=MODES, default="full")
    solver_flags(p)
    p.add_argument("--memoize", action="store_true")
    p.add_argument("--no-leveloff", action="store_true")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.add_argument("--transcript", help="write LLM prompts and responses here (llm advisor)")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("validate", help="check a layered plan against a problem")
    p.add_argument("--domain", required=True)
    p.add_argument("--problem", required=True)
    p.add_argument("--plan", required=True)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("corrupt", help="delete a seeded share of condition literals")
    p.add_argument("--domain", required=True)
    p.add_argument("--proportion", type=float, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_corrupt)

    p = sub.add_parser("bench", help="run a benchmark suite and write CSV/JSON tables")
    p.add_argument("--suite", required=True, help="suite directory, or 'bundled'")
    p.add_argument("--modes", type=_names, default=["full", "gp"])
    p.add_argument("--advisors", type=_names, default=["heuristic"])
    p.add_argument("--repeats", type=int, default=3)
    p.add_argument("--corrupt-proportions", type=_floats, default=[0.0])
    p.add_argument("--out", required=True)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--depth-bound", action="store_true",
                   help="score plans longer than the manifest optimum as failures")
    solver_flags(p)
    p.set_defaults(func=cmd_bench, timeout=60.0)
    return ap


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_INPUT if e.code not in (0, None) else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except InputError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT
    except LLMError as e:
        print(f"transport error ({e.code}): {e}", file=sys.stderr)
        return EXIT_TRANSPORT


if __name__ == "__main__":
    sys.exit(main())
