"""Planning graph with mutex bookkeeping and an advisor-gated expansion step."""
from __future__ import annotations

import itertools
import random
from collections import defaultdict
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Optional, Union

from .advisor import PRUNE, AdviceContext, Advisor
from .metrics import RunMetrics, check_deadline
from .strips import GroundAction, GroundTask, Literal, PlanningProblem


class MutexReason(str, Enum):
    INCONSISTENT_EFFECTS = "inconsistent-effects"
    INTERFERENCE = "interference"
    COMPETING_NEEDS = "competing-needs"
    INCONSISTENT_SUPPORT = "inconsistent-support"
    NEGATION = "negation"

    def __str__(self) -> str:
        return self.value


def pair(a, b) -> frozenset:
    return frozenset((a, b))


@dataclass
class LiteralLevel:
    index: int
    literals: frozenset[Literal]
    mutex_with: dict[Literal, frozenset[Literal]] = field(default_factory=dict)
    support: dict[Literal, tuple[GroundAction, ...]] = field(default_factory=dict)

    def is_mutex(self, a: Literal, b: Literal) -> bool:
        return b in self.mutex_with.get(a, ())

    @property
    def mutex(self) -> set[frozenset]:
        return {pair(a, b) for a, bs in self.mutex_with.items() for b in bs}

    @property
    def positives(self) -> frozenset:
        return frozenset(l.prop for l in self.literals if l.positive)


@dataclass
class ActionLevel:
    index: int
    actions: tuple[GroundAction, ...]
    reasons: dict[frozenset, MutexReason] = field(default_factory=dict)
    mutex_with: dict[GroundAction, set[GroundAction]] = field(default_factory=dict)
    pruned: tuple[GroundAction, ...] = ()

    def is_mutex(self, a: GroundAction, b: GroundAction) -> bool:
        return b in self.mutex_with.get(a, ())

    @property
    def mutex(self) -> dict[frozenset, MutexReason]:
        return self.reasons

    @property
    def domain_actions(self) -> tuple[GroundAction, ...]:
        return tuple(a for a in self.actions if not a.is_noop)


class PlanningGraph:
    def __init__(self, task: GroundTask):
        self.task = task
        self.literal_levels: list[LiteralLevel] = []
        self.action_levels: list[ActionLevel] = []

    @property
    def problem(self) -> PlanningProblem:
        return self.task.problem

    @property
    def depth(self) -> int:
        """Number of action levels built so far."""
        return len(self.action_levels)

    @property
    def last(self) -> LiteralLevel:
        return self.literal_levels[-1]

    def action_level(self, k: int) -> ActionLevel:
        return self.action_levels[k - 1]

    @property
    def levels(self) -> list[Union[LiteralLevel, ActionLevel]]:
        out: list = [self.literal_levels[0]]
        for a, l in zip(self.action_levels, self.literal_levels[1:]):
            out += [a, l]
        return out

    @property
    def leveled_off(self) -> bool:
        return leveled_off(self)

    def dump(self) -> str:
        return dump_graph(self)


def init_graph(problem: Union[PlanningProblem, GroundTask]) -> PlanningGraph:
    task = problem if isinstance(problem, GroundTask) else GroundTask.build(problem)
    init = task.problem.init
    literals = frozenset(Literal(p, p in init) for p in task.propositions)
    graph = PlanningGraph(task)
    graph.literal_levels.append(LiteralLevel(0, literals, {}, {}))
    return graph


def _changes(a: GroundAction) -> frozenset:
    # A noop only carries its literal forward; against the mutex rules it
    # behaves as a pure precondition, so clashes with it count as interference.
    return frozenset() if a.is_noop else a.effects


def action_mutex(a: GroundAction, b: GroundAction,
                 previous: LiteralLevel) -> Optional[MutexReason]:
    """Classify why two actions of one level exclude each other (first rule wins)."""
    for x, y in ((a, b), (b, a)):
        if any(l.neg() in _changes(y) for l in _changes(x)):
            return MutexReason.INCONSISTENT_EFFECTS
    for x, y in ((a, b), (b, a)):
        if any(l.neg() in y.pre_literals for l in _changes(x)):
            return MutexReason.INTERFERENCE
    for p in a.pre_literals:
        for q in b.pre_literals:
            if previous.is_mutex(p, q):
                return MutexReason.COMPETING_NEEDS
    return None


def literal_mutex(l1: Literal, l2: Literal, level: LiteralLevel, actions: ActionLevel) -> bool:
    """Negation, or every way of achieving the two literals is pairwise mutex."""
    if l1 == l2:
        return False
    if l1 == l2.neg():
        return True
    s1 = level.support.get(l1, ())
    s2 = level.support.get(l2, ())
    if set(s1) & set(s2):
        return False
    return all(actions.is_mutex(a, b) for a in s1 for b in s2)


def _action_mutexes(actions: tuple[GroundAction, ...], previous: LiteralLevel,
                    deadline=None) -> dict[frozenset, MutexReason]:
    by_effect = defaultdict(list)
    by_pre = defaultdict(list)
    for a in actions:
        for l in _changes(a):
            by_effect[l].append(a)
        for l in a.pre_literals:
            by_pre[l].append(a)
    effects, interference, needs = set(), set(), set()
    for i, a in enumerate(actions):
        if i % 256 == 0:
            check_deadline(deadline)
        for l in _changes(a):
            n = l.neg()
            for b in by_effect.get(n, ()):
                effects.add(pair(a, b))
            for b in by_pre.get(n, ()):
                if b is not a:
                    interference.add(pair(a, b))
        for p in a.pre_literals:
            for q in previous.mutex_with.get(p, ()):
                for b in by_pre.get(q, ()):
                    needs.add(pair(a, b))
    reasons = {}
    for pr in needs:
        reasons[pr] = MutexReason.COMPETING_NEEDS
    for pr in interference:
        reasons[pr] = MutexReason.INTERFERENCE
    for pr in effects:
        reasons[pr] = MutexReason.INCONSISTENT_EFFECTS
    return {pr: r for pr, r in reasons.items() if len(pr) == 2}


def candidates(graph: PlanningGraph) -> list[GroundAction]:
    """Domain actions whose preconditions are present and pairwise non-mutex."""
    last = graph.last
    present = last.positives
    out = []
    for a in graph.task.actions:
        if not a.pre <= present:
            continue
        pre = list(a.pre_literals)
        if any(last.is_mutex(p, q) for p, q in itertools.combinations(pre, 2)):
            continue
        out.append(a)
    return out


def expand(graph: PlanningGraph, advisor: Optional[Advisor] = None, kappa: float = 1.0,
           rng: Optional[random.Random] = None, metrics: Optional[RunMetrics] = None,
           keep_all_on_empty: bool = True, deadline: Optional[float] = None) -> PlanningGraph:
    """Add one action level and one literal level, in place.

    Each candidate the advisor rejects is dropped with probability ``kappa``;
    noops are always added and never shown to the advisor.
    """
    if not 0.0 <= kappa <= 1.0:
        raise ValueError(f"kappa must lie in [0, 1], got {kappa}")
    metrics = metrics if metrics is not None else RunMetrics()
    rng = rng if rng is not None else random.Random(0)
    k = graph.depth + 1
    last = graph.last
    check_deadline(deadline)
    cands = candidates(graph)

    kept, removed = cands, []
    if advisor is not None and not advisor.passthrough and cands:
        ctx = AdviceContext(PRUNE, k, graph.task.domain_text, graph.problem.init,
                            graph.problem.goal, last.literals, tuple(cands), task=graph.task)
        decision = advisor.prune(ctx)
        metrics.advisor_calls += 1
        metrics.skipped_response_lines += decision.skipped_lines
        keep = set(decision.actions) & set(cands)
        if not keep and keep_all_on_empty:
            metrics.empty_keep_coercions += 1
            keep = set(cands)
        kept = []
        for a in cands:
            if a not in keep and rng.random() < kappa:
                removed.append(a)
            else:
                kept.append(a)

    noops = [GroundAction.noop(l) for l in sorted(last.literals, key=Literal.sort_key)]
    actions = tuple(kept) + tuple(noops)
    reasons = _action_mutexes(actions, last, deadline)
    mutex_with: dict[GroundAction, set[GroundAction]] = defaultdict(set)
    for pr in reasons:
        a, b = tuple(pr)
        mutex_with[a].add(b)
        mutex_with[b].add(a)
    alevel = ActionLevel(k, actions, reasons, dict(mutex_with), tuple(removed))

    support: dict[Literal, list[GroundAction]] = defaultdict(list)
    for a in actions:
        for l in a.effects:
            support[l].append(a)
    literals = frozenset(support)
    support_t = {l: tuple(sorted(s)) for l, s in support.items()}
    lmutex: dict[Literal, set[Literal]] = defaultdict(set)
    new = literals - last.literals
    # A pair that was not mutex at the previous level cannot become mutex:
    # both noops are present and non-mutex.  Only old mutex pairs and pairs
    # involving a new literal need checking.
    to_check = set()
    for l1, others in last.mutex_with.items():
        for l2 in others:
            to_check.add(pair(l1, l2))
    for l1 in new:
        for l2 in literals:
            if l1 != l2:
                to_check.add(pair(l1, l2))
    tmp = LiteralLevel(k, literals, {}, support_t)
    for i, pr in enumerate(to_check):
        if i % 4096 == 0:
            check_deadline(deadline)
        l1, l2 = tuple(pr)
        if literal_mutex(l1, l2, tmp, alevel):
            lmutex[l1].add(l2)
            lmutex[l2].add(l1)
    tmp.mutex_with = {l: frozenset(s) for l, s in lmutex.items()}

    graph.action_levels.append(alevel)
    graph.literal_levels.append(tmp)
    metrics.record_layer(k, len(actions))
    metrics.mutex_pairs += len(reasons)
    return graph


def goal_satisfied(graph: PlanningGraph) -> bool:
    last = graph.last
    goals = [Literal(p, True) for p in graph.problem.goal]
    if not all(g in last.literals for g in goals):
        return False
    return not any(last.is_mutex(a, b) for a, b in itertools.combinations(goals, 2))


def leveled_off(graph: PlanningGraph) -> bool:
    if len(graph.literal_levels) < 2:
        return False
    a, b = graph.literal_levels[-2], graph.literal_levels[-1]
    return a.literals == b.literals and a.mutex_with == b.mutex_with


def _fmt_pair(pr: Iterable, key) -> str:
    x, y = sorted(pr, key=key)
    return f"{x} | {y}"


def dump_graph(graph: PlanningGraph) -> str:
    """Line-oriented canonical text rendering, one section per level."""
    lkey = Literal.sort_key
    akey = GroundAction.__lt__  # noqa: F841 (documentation of ordering)
    out = []
    for level in graph.levels:
        if isinstance(level, LiteralLevel):
            out.append(f"[literal-level {level.index}]")
            out.extend(f"literal {l}" for l in sorted(level.literals, key=lkey))
            pairs = sorted((tuple(sorted(pr, key=lkey)) for pr in level.mutex),
                           key=lambda t: (lkey(t[0]), lkey(t[1])))
            out.extend(f"mutex {a} | {b}" for a, b in pairs)
        else:
            out.append(f"[action-level {level.index}]")
            out.extend(f"action {a}" for a in sorted(level.actions))
            rows = sorted((tuple(sorted(pr)), r) for pr, r in level.reasons.items())
            out.extend(f"mutex {a} | {b} : {r}" for (a, b), r in rows)
    return "\n".join(out) + "\n"
