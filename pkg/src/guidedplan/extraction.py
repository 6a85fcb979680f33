"""Backward solution extraction over a planning graph."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Optional, Sequence

from .advisor import SORT, AdviceContext, Advisor, AdvisorError
from .graph import MutexReason, PlanningGraph
from .llm import LLMError
from .metrics import check_deadline
from .strips import GroundAction, LayeredPlan, Literal


class ExtractionError(ValueError):
    """Contract violation while querying the graph."""


@dataclass
class ConstraintSet:
    """Action mutex pairs per action level, keyed by level index (1-based)."""

    levels: dict[int, dict[frozenset, MutexReason]] = field(default_factory=dict)
    _adj: dict[int, dict[GroundAction, set]] = field(default_factory=dict, repr=False)

    def reason(self, level: int, a: GroundAction, b: GroundAction) -> Optional[MutexReason]:
        return self.levels.get(level, {}).get(frozenset((a, b)))

    def is_mutex(self, level: int, a: GroundAction, b: GroundAction) -> bool:
        return b in self._adj.get(level, {}).get(a, ())

    def __len__(self) -> int:
        return sum(len(v) for v in self.levels.values())


def build_constraints(graph: PlanningGraph) -> ConstraintSet:
    cs = ConstraintSet()
    for level in graph.action_levels:
        cs.levels[level.index] = dict(level.reasons)
        cs._adj[level.index] = level.mutex_with
    return cs


@dataclass
class ExtractionStats:
    dfs_nodes: int = 0
    memo_hits: int = 0
    advisor_calls: int = 0
    advisor_failures: int = 0
    skipped_response_lines: int = 0


def achievers(graph: PlanningGraph, level: int, literal: Literal) -> list[GroundAction]:
    """Actions of action level ``level`` that produce ``literal``, canonically ordered."""
    if not 1 <= level <= graph.depth:
        raise ExtractionError(f"no action level {level}")
    lits = graph.literal_levels[level]
    if literal not in lits.literals:
        raise ExtractionError(f"{literal} is absent from literal level {level}")
    return sorted(lits.support.get(literal, ()))


def goal_key(goals) -> tuple[Literal, ...]:
    return tuple(sorted(goals, key=Literal.sort_key))


def candidate_sets(graph: PlanningGraph, level: int, goals, constraints: ConstraintSet,
                   rank: Optional[dict[GroundAction, int]] = None
                   ) -> Iterator[frozenset[GroundAction]]:
    """Lazily yield minimal pairwise non-mutex covers of ``goals`` at ``level``.

    Goals are covered one at a time in canonical order; achievers of each goal
    are tried in ``rank`` order (canonical when omitted).
    """
    ordered = goal_key(goals)
    support = graph.literal_levels[level].support
    options = []
    for g in ordered:
        acts = list(support.get(g, ()))
        if rank is not None:
            acts.sort(key=lambda a: (rank.get(a, len(rank)), a.key))
        else:
            acts.sort()
        options.append(acts)
    adj = constraints._adj.get(level, {})
    seen: set[frozenset] = set()
    chosen: list[GroundAction] = []

    def minimal(acts: list[GroundAction]) -> bool:
        for a in acts:
            if not any(g in a.effects and not any(g in b.effects for b in acts if b is not a)
                       for g in ordered):
                return False
        return True

    def walk(i: int) -> Iterator[frozenset]:
        while i < len(ordered) and any(ordered[i] in a.effects for a in chosen):
            i += 1
        if i == len(ordered):
            s = frozenset(chosen)
            if s not in seen and minimal(chosen):
                seen.add(s)
                yield s
            return
        for a in options[i]:
            bad = adj.get(a, ())
            if any(b in bad for b in chosen):
                continue
            chosen.append(a)
            yield from walk(i + 1)
            chosen.pop()

    yield from walk(0)


def order_achievers(advisor: Optional[Advisor], ctx: Optional[AdviceContext],
                    actions: Sequence[GroundAction],
                    stats: Optional[ExtractionStats] = None) -> list[GroundAction]:
    """Total order over ``actions``: advisor-mentioned first, then the rest canonically."""
    canonical = sorted(actions)
    if advisor is None or advisor.passthrough or ctx is None:
        return canonical
    stats = stats if stats is not None else ExtractionStats()
    domain = tuple(a for a in canonical if not a.is_noop)
    if not domain:
        return canonical
    if ctx.candidates != domain:
        ctx = AdviceContext(SORT, ctx.level, ctx.domain_text, ctx.init, ctx.goal, ctx.literals,
                            domain, ctx.subgoals, ctx.constraints, ctx.task)
    try:
        decision = advisor.order(ctx)
    except (AdvisorError, LLMError):
        stats.advisor_failures += 1
        return canonical
    finally:
        stats.advisor_calls += 1
    stats.skipped_response_lines += decision.skipped_lines
    allowed = set(canonical)
    head = []
    for a in decision.actions:
        if a in allowed and a not in head:
            head.append(a)
    picked = set(head)
    return head + [a for a in canonical if a not in picked]


def extract(graph: PlanningGraph, constraints: ConstraintSet, advisor: Optional[Advisor] = None,
            stats: Optional[ExtractionStats] = None, memoize: bool = False,
            deadline: Optional[float] = None) -> Optional[LayeredPlan]:
    """Backward depth-first search from the goals at the last level; None on exhaustion."""
    stats = stats if stats is not None else ExtractionStats()
    top = graph.depth
    problem = graph.problem
    init_literals = graph.literal_levels[0].literals
    ranks: dict[int, dict[GroundAction, int]] = {}
    failed: set[tuple[int, frozenset]] = set()

    def rank_for(level: int, goals) -> dict[GroundAction, int]:
        if level not in ranks:
            alevel = graph.action_level(level)
            ctx = None
            if advisor is not None and not advisor.passthrough:
                ctx = AdviceContext(
                    SORT, level, graph.task.domain_text, problem.init, problem.goal,
                    graph.literal_levels[level - 1].literals, alevel.domain_actions,
                    frozenset(goals), constraint_triples(constraints, level), graph.task)
            order = order_achievers(advisor, ctx, alevel.actions, stats)
            ranks[level] = {a: i for i, a in enumerate(order)}
        return ranks[level]

    def dfs(level: int, goals: frozenset) -> Optional[list[frozenset]]:
        stats.dfs_nodes += 1
        check_deadline(deadline)
        lits = graph.literal_levels[level]
        if any(g not in lits.literals for g in goals):
            return None
        glist = goal_key(goals)
        for i, g in enumerate(glist):
            for h in glist[i + 1:]:
                if lits.is_mutex(g, h):
                    return None
        if level == 0:
            return [] if all(g in init_literals for g in goals) else None
        if memoize and (level, goals) in failed:
            stats.memo_hits += 1
            return None
        rank = rank_for(level, goals)
        for cset in candidate_sets(graph, level, goals, constraints, rank):
            sub = frozenset(l for a in cset for l in a.pre_literals)
            found = dfs(level - 1, sub)
            if found is not None:
                return found + [cset]
        if memoize:
            failed.add((level, goals))
        return None

    goals = frozenset(Literal(p, True) for p in problem.goal)
    layers = dfs(top, goals)
    if layers is None:
        return None
    stripped = [frozenset(a for a in layer if not a.is_noop) for layer in layers]
    return LayeredPlan(tuple(layer for layer in stripped if layer))


def constraint_triples(constraints: ConstraintSet, level: int):
    rows = []
    for pr, why in constraints.levels.get(level, {}).items():
        a, b = sorted(pr)
        if not a.is_noop and not b.is_noop:
            rows.append((a, b, str(why)))
    return tuple(sorted(rows, key=lambda r: (r[0].key, r[1].key))) or None
