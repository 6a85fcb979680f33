"""Benchmark harness: solve a suite under modes, advisors, repeats and corruption levels."""
from __future__ import annotations

import csv
import hashlib
import io
import json
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Iterable, Optional

from .advisor import (Advisor, HeuristicAdvisor, PassthroughAdvisor, RejectAllAdvisor,
                      ReplayAdvisor)
from .corpus import DATA
from .pddl import corrupt_domain, load_domain, load_problem, parse_problem
from .solver import SOLVED, SolverConfig, run_ablation
from .strips import validate

log = logging.getLogger(__name__)

DEFAULT_PROPORTIONS = (0.1, 0.2, 0.3, 0.4, 0.5)


@dataclass(frozen=True)
class BenchRow:
    domain: str
    problem: str
    mode: str
    advisor: str
    proportion: float
    repeat: int
    seed: int
    outcome: str
    success: int
    layers: int
    plan_actions: int
    expansion_actions: int
    mutex_pairs: int
    dfs_nodes: int
    advisor_calls: int
    wall_ms: float

    def sort_key(self):
        return (self.domain, self.problem, self.mode, self.advisor, self.proportion, self.repeat)


FIELDS = [f.name for f in fields(BenchRow)]
_TYPES = {f.name: f.type for f in fields(BenchRow)}


def parse_row(raw: dict) -> BenchRow:
    conv = {"int": int, "float": float, "str": str}
    return BenchRow(**{k: conv[_TYPES[k]](raw[k]) for k in FIELDS})


def derive_seed(*parts) -> int:
    digest = hashlib.sha256("/".join(str(p) for p in parts).encode()).digest()
    return int.from_bytes(digest[:8], "big")


def make_advisor(spec: str) -> Advisor:
    if spec == "passthrough":
        return PassthroughAdvisor()
    if spec == "heuristic":
        return HeuristicAdvisor()
    if spec == "reject-all":
        return RejectAllAdvisor()
    if spec.startswith("fixture:"):
        return ReplayAdvisor.from_file(spec.split(":", 1)[1])
    if spec == "llm":
        from .advisor import LLMAdvisor
        from .llm import ChatClient, LlmConfig
        return LLMAdvisor(ChatClient(LlmConfig.from_env()))
    raise ValueError(f"unknown advisor {spec!r}")


def load_suite(path) -> list[tuple[str, Path, list[Path]]]:
    """A suite is a directory with domain.pddl and problems, or a directory of such."""
    path = Path(path)
    if str(path) == "bundled":
        path = DATA
    if not path.is_dir():
        raise FileNotFoundError(f"suite directory not found: {path}")
    dirs = [path] if (path / "domain.pddl").is_file() else sorted(
        p for p in path.iterdir() if (p / "domain.pddl").is_file())
    if not dirs:
        raise FileNotFoundError(f"no domain.pddl under {path}")
    out = []
    for d in dirs:
        probs = sorted(p for p in d.glob("*.pddl") if p.name != "domain.pddl")
        out.append((d.name, d / "domain.pddl", probs))
    return out


@dataclass(frozen=True)
class Job:
    domain: str
    domain_path: str
    problem_path: str
    mode: str
    advisor: str
    proportion: float
    repeat: int
    seed: int
    kappa0: float
    max_levels: int
    max_restarts: int
    timeout: Optional[float]
    depth_bound: Optional[int]


def run_job(job: Job) -> tuple[BenchRow, dict]:
    original = load_domain(job.domain_path)
    problem_text = Path(job.problem_path).read_text(encoding="utf-8")
    problem = parse_problem(problem_text, original)
    detail: dict = {"problem_path": job.problem_path}
    solver_seed = derive_seed(job.seed, job.repeat)
    domain = original
    if job.proportion > 0:
        cseed = derive_seed(job.seed, job.proportion, job.repeat)
        domain, report = corrupt_domain(original, job.proportion, cseed)
        detail["corruption"] = report.to_json()
    config = SolverConfig(kappa0=job.kappa0, max_levels=job.max_levels,
                          max_restarts=job.max_restarts, seed=solver_seed, timeout=job.timeout)
    outcome, plan, metrics = "error", None, None
    try:
        solved_on = parse_problem(problem_text, domain) if domain is not original else problem
        result = run_ablation(solved_on, make_advisor(job.advisor), config, job.mode)
        outcome, plan, metrics = result.outcome, result.plan, result.metrics
        detail["attempts"] = [a.to_json() for a in result.attempts]
        detail["errors"] = [f"{type(e).__name__}: {e}" for e in result.errors]
    except Exception as e:  # a broken row must never abort the suite
        log.warning("%s %s: %s", job.domain, job.problem_path, e)
        detail["errors"] = [f"{type(e).__name__}: {e}"]
    success = 0
    if outcome == SOLVED and plan is not None:
        # corrupted models can produce plans the real domain rejects
        verdict = validate(problem, plan)
        if not verdict.valid:
            outcome = "invalid-plan"
            detail["invalid_reason"] = verdict.reason
        elif job.depth_bound is not None and len(plan) > job.depth_bound:
            outcome = "depth-exceeded"
        else:
            success = 1
        detail["plan"] = plan.to_json()["layers"]
    m = metrics
    row = BenchRow(
        domain=job.domain, problem=Path(job.problem_path).stem, mode=job.mode,
        advisor=job.advisor, proportion=job.proportion, repeat=job.repeat, seed=solver_seed,
        outcome=outcome, success=success,
        layers=len(plan) if plan is not None else 0,
        plan_actions=len(plan.actions) if plan is not None else 0,
        expansion_actions=m.expansion_actions if m else 0,
        mutex_pairs=m.mutex_pairs if m else 0,
        dfs_nodes=m.dfs_nodes if m else 0,
        advisor_calls=m.advisor_calls if m else 0,
        wall_ms=round(m.wall_time * 1000, 3) if m else 0.0,
    )
    return row, detail


def plan_jobs(suite, modes: Iterable[str], advisors: Iterable[str], repeats: int,
              proportions: Iterable[float], seed: int, kappa0: float = 0.9,
              max_levels: int = 15, max_restarts: int = 10, timeout: Optional[float] = 60.0,
              depth_bounds: Optional[dict] = None) -> list[Job]:
    jobs = []
    for domain, dpath, probs in suite:
        for p in probs:
            bound = (depth_bounds or {}).get(f"{domain}/{p.stem}")
            for mode in modes:
                for adv in advisors:
                    for prop in proportions:
                        for r in range(repeats):
                            jobs.append(Job(domain, str(dpath), str(p), mode, adv, float(prop), r,
                                            seed, kappa0, max_levels, max_restarts, timeout, bound))
    return jobs


def run_bench(jobs: list[Job], n_jobs: int = 1) -> list[tuple[BenchRow, dict]]:
    if n_jobs > 1:
        with ProcessPoolExecutor(max_workers=n_jobs) as pool:
            results = list(pool.map(run_job, jobs))
    else:
        results = [run_job(j) for j in jobs]
    return sorted(results, key=lambda rd: rd[0].sort_key())


def rows_to_csv(rows: Iterable[BenchRow]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=FIELDS, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow(asdict(r))
    return buf.getvalue()


def read_csv(path) -> list[BenchRow]:
    with open(path, newline="", encoding="utf-8") as fh:
        return [parse_row(r) for r in csv.DictReader(fh)]


def summarize(rows: Iterable[BenchRow]) -> list[dict]:
    """Success rate and mean counters per (domain, mode, advisor, proportion)."""
    groups: dict[tuple, list[BenchRow]] = {}
    for r in rows:
        groups.setdefault((r.domain, r.mode, r.advisor, r.proportion), []).append(r)
    out = []
    for (domain, mode, adv, prop), rs in sorted(groups.items()):
        n = len(rs)
        out.append({
            "domain": domain, "mode": mode, "advisor": adv, "proportion": prop, "runs": n,
            "success_rate": f"{sum(r.success for r in rs) / n:.2f}",
            "mean_expansion_actions": f"{sum(r.expansion_actions for r in rs) / n:.2f}",
            "mean_mutex_pairs": f"{sum(r.mutex_pairs for r in rs) / n:.2f}",
            "mean_dfs_nodes": f"{sum(r.dfs_nodes for r in rs) / n:.2f}",
        })
    return out


def summary_to_csv(summary: list[dict]) -> str:
    buf = io.StringIO()
    if summary:
        w = csv.DictWriter(buf, fieldnames=list(summary[0]), lineterminator="\n")
        w.writeheader()
        w.writerows(summary)
    return buf.getvalue()


def write_outputs(out, results: list[tuple[BenchRow, dict]], meta: dict) -> dict[str, Path]:
    out = Path(out)
    out.parent.mkdir(parents=True, exist_ok=True)
    rows = [r for r, _ in results]
    summary_path = out.with_name(out.stem + ".summary.csv")
    sidecar = out.with_name(out.stem + ".json")
    out.write_text(rows_to_csv(rows), encoding="utf-8")
    summary_path.write_text(summary_to_csv(summarize(rows)), encoding="utf-8")
    sidecar.write_text(json.dumps({
        "config": meta,
        "rows": [dict(asdict(r), **d) for r, d in results],
    }, indent=2) + "\n", encoding="utf-8")
    return {"csv": out, "summary": summary_path, "json": sidecar}
