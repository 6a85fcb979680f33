"""Restart loop with a decaying pruning probability around expand/extract."""
from __future__ import annotations

import random
import time
from dataclasses import dataclass, field, replace
from typing import Optional, Union

from .advisor import Advisor, AdvisorError, PassthroughAdvisor
from .extraction import ExtractionStats, build_constraints, extract
from .graph import PlanningGraph, expand, goal_satisfied, init_graph, leveled_off
from .llm import LLMError
from .metrics import RunMetrics, SolveTimeout
from .strips import GroundTask, LayeredPlan, PlanningProblem, validate

SOLVED = "solved"
EXHAUSTED = "exhausted"
UNSOLVABLE = "leveled-off-unsolvable"
DEPTH_EXCEEDED = "depth-exceeded"
TIMEOUT = "timeout"

MODES = ("full", "unsorted", "unpruned", "gp")

__all__ = ["SolverConfig", "SolveResult", "AttemptRecord", "RunMetrics", "solve",
           "run_ablation", "MODES", "kappa_schedule"]


@dataclass(frozen=True)
class SolverConfig:
    kappa0: float = 0.9
    max_restarts: int = 10
    max_levels: int = 15
    prune: bool = True
    sort: bool = True
    memoize: bool = False
    seed: int = 0
    depth_bound: Optional[int] = None
    leveloff: bool = True
    keep_all_on_empty: bool = True
    timeout: Optional[float] = None

    def __post_init__(self):
        if not 0.0 <= self.kappa0 <= 1.0:
            raise ValueError(f"kappa0 must lie in [0, 1], got {self.kappa0}")
        if self.max_restarts < 1:
            raise ValueError("max_restarts must be >= 1")
        if self.max_levels < 1:
            raise ValueError("max_levels must be >= 1")

    def for_mode(self, mode: str) -> "SolverConfig":
        if mode not in MODES:
            raise ValueError(f"unknown mode {mode!r}; expected one of {', '.join(MODES)}")
        return replace(self, prune=mode in ("full", "unsorted"), sort=mode in ("full", "unpruned"))


def kappa_schedule(kappa0: float, attempt: int) -> float:
    return kappa0 ** attempt


@dataclass
class AttemptRecord:
    index: int
    kappa: float
    levels: int = 0
    dfs_nodes: int = 0
    pruned: int = 0
    outcome: str = ""
    error: Optional[str] = None

    def to_json(self) -> dict:
        return {"index": self.index, "kappa": self.kappa, "levels": self.levels,
                "dfs_nodes": self.dfs_nodes, "pruned": self.pruned,
                "outcome": self.outcome, "error": self.error}


@dataclass
class SolveResult:
    outcome: str
    plan: Optional[LayeredPlan]
    metrics: RunMetrics
    attempts: list[AttemptRecord] = field(default_factory=list)
    graph: Optional[PlanningGraph] = field(default=None, compare=False, repr=False)
    errors: list[Exception] = field(default_factory=list, compare=False)

    @property
    def solved(self) -> bool:
        return self.outcome == SOLVED

    @property
    def layers(self) -> int:
        return len(self.plan) if self.plan is not None else 0

    def to_json(self) -> dict:
        return {"outcome": self.outcome,
                "plan": self.plan.to_json()["layers"] if self.plan is not None else None,
                "metrics": self.metrics.to_json(),
                "attempts": [a.to_json() for a in self.attempts],
                "errors": [f"{type(e).__name__}: {e}" for e in self.errors]}


def _attempt(task: GroundTask, advisor: Advisor, config: SolverConfig, index: int,
             record: AttemptRecord, metrics: RunMetrics, deadline):
    kappa = record.kappa
    rng = random.Random(f"{config.seed}/{index}")
    graph = init_graph(task)
    prune_adv = advisor if config.prune else None
    sort_adv = advisor if config.sort else None
    while True:
        if goal_satisfied(graph):
            stats = ExtractionStats()
            try:
                plan = extract(graph, build_constraints(graph), sort_adv, stats,
                               memoize=config.memoize, deadline=deadline)
            finally:
                metrics.dfs_nodes += stats.dfs_nodes
                metrics.memo_hits += stats.memo_hits
                metrics.advisor_calls += stats.advisor_calls
                metrics.advisor_failures += stats.advisor_failures
                metrics.skipped_response_lines += stats.skipped_response_lines
                record.dfs_nodes += stats.dfs_nodes
            if plan is not None:
                return graph, plan
        elif graph.depth and leveled_off(graph):
            # Only an unpruned graph certifies that the goal is unreachable.
            if config.leveloff and record.pruned == 0:
                return graph, UNSOLVABLE
            return graph, None
        if graph.depth >= config.max_levels:
            return graph, None
        expand(graph, prune_adv, kappa, rng, metrics, config.keep_all_on_empty, deadline)
        record.levels = graph.depth
        record.pruned += len(graph.action_levels[-1].pruned)


def solve(problem: Union[PlanningProblem, GroundTask], advisor: Optional[Advisor] = None,
          config: Optional[SolverConfig] = None) -> SolveResult:
    config = config or SolverConfig()
    advisor = advisor or PassthroughAdvisor()
    start = time.monotonic()
    deadline = start + config.timeout if config.timeout else None
    task = problem if isinstance(problem, GroundTask) else GroundTask.build(problem)
    metrics = RunMetrics()
    attempts: list[AttemptRecord] = []
    errors: list[Exception] = []
    graph = None

    def finish(outcome, plan=None):
        metrics.wall_time = time.monotonic() - start
        return SolveResult(outcome, plan, metrics, attempts, graph, errors)

    for i in range(1, config.max_restarts + 1):
        record = AttemptRecord(i, kappa_schedule(config.kappa0, i))
        attempts.append(record)
        try:
            graph, found = _attempt(task, advisor, config, i, record, metrics, deadline)
        except SolveTimeout:
            record.outcome = TIMEOUT
            return finish(TIMEOUT)
        except (AdvisorError, LLMError) as e:
            record.outcome = "error"
            record.error = f"{type(e).__name__}: {e}"
            errors.append(e)
            continue
        if found == UNSOLVABLE:
            record.outcome = UNSOLVABLE
            return finish(UNSOLVABLE)
        if isinstance(found, LayeredPlan):
            verdict = validate(task.problem, found)
            if not verdict.valid:
                raise AssertionError(f"extracted plan does not validate: {verdict.reason}")
            if config.depth_bound is not None and len(found) > config.depth_bound:
                record.outcome = DEPTH_EXCEEDED
                return finish(DEPTH_EXCEEDED)
            record.outcome = SOLVED
            return finish(SOLVED, found)
        record.outcome = EXHAUSTED
        if record.pruned == 0:
            # nothing was pruned, so later attempts would rebuild the same graph
            break
    return finish(EXHAUSTED)


def run_ablation(problem, advisor: Optional[Advisor], config: Optional[SolverConfig],
                 mode: str) -> SolveResult:
    config = (config or SolverConfig()).for_mode(mode)
    return solve(problem, advisor, config)
