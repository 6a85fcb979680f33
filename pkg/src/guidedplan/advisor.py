"""Advisors: the pluggable guidance used to prune expansions and order extraction.

Every advisor answers two questions about a list of candidate domain actions:
``prune`` (which ones are worth adding to the next action level) and ``order``
(which ones to try first when regressing goals).  Noops are never shown to an
advisor.
"""
from __future__ import annotations

import json
import re
import threading
import uuid
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Optional

from .strips import GroundAction, GroundTask, Literal, Proposition

PRUNE = "prune"
SORT = "sort"

FORMAT_EXAMPLE = "move {'?from': 'rooma', '?to': 'roomb'}"

PRUNE_INSTRUCTION = (
    "Choose the candidate actions that are worth adding to the next level of the "
    "planning graph, i.e. the ones that can help reach the goal from the initial state. "
    "Drop actions that are clearly useless. Output only the chosen actions, one per line, "
    "copied exactly from the candidate list.")
SORT_INSTRUCTION = (
    "Sort all candidate actions from the most to the least promising for reaching the goal "
    "from the initial state. Output every candidate action exactly once, one per line, "
    "copied exactly from the candidate list.")


class AdvisorError(Exception):
    """The advisor could not produce a decision."""


class FixtureError(AdvisorError):
    pass


@dataclass(frozen=True)
class AdviceContext:
    phase: str
    level: int
    domain_text: str
    init: frozenset[Proposition]
    goal: frozenset[Proposition]
    literals: frozenset[Literal]
    candidates: tuple[GroundAction, ...]
    subgoals: frozenset[Literal] = frozenset()
    constraints: Optional[tuple[tuple[GroundAction, GroundAction, str], ...]] = None
    task: Optional[GroundTask] = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if self.phase not in (PRUNE, SORT):
            raise ValueError(f"unknown phase {self.phase!r}")
        if self.phase == PRUNE and not self.candidates:
            raise ValueError("prune context needs at least one candidate")


@dataclass(frozen=True)
class AdvisorDecision:
    actions: tuple[GroundAction, ...]
    raw_response: str = ""
    transcript_id: Optional[str] = None
    skipped_lines: int = 0


def render_action_line(action: GroundAction) -> str:
    inner = ", ".join(f"'{p}': '{v}'" for p, v in zip(action.params, action.args))
    return f"{action.name} {{{inner}}}"


_LINE = re.compile(r"([A-Za-z][\w-]*)\s*\{([^{}]*)\}")
_PAIR = re.compile(r"'(\?[\w-]+)'\s*:\s*'([\w-]+)'")


class ParsedActions(NamedTuple):
    actions: list[GroundAction]
    skipped: int


def parse_action_lines(text: str, candidates: Iterable[GroundAction]) -> ParsedActions:
    """Tolerantly read ``NAME {'?p': 'v', ...}`` lines and match them to candidates."""
    index = {}
    for a in candidates:
        if not a.is_noop:
            index[(a.name.upper(), tuple(sorted(a.binding.items())))] = a
    out: list[GroundAction] = []
    seen = set()
    skipped = 0
    for line in text.splitlines():
        if not line.strip():
            continue
        m = _LINE.search(line)
        if not m:
            skipped += 1
            continue
        binding = tuple(sorted((k.lower(), v.lower()) for k, v in _PAIR.findall(m.group(2))))
        action = index.get((m.group(1).upper(), binding))
        if action is None:
            skipped += 1
        elif action not in seen:
            seen.add(action)
            out.append(action)
    return ParsedActions(out, skipped)


def _props(props: Iterable[Proposition]) -> str:
    return "\n".join(str(p) for p in sorted(props)) or "(none)"


def build_prompt(ctx: AdviceContext) -> str:
    parts = [
        "Domain:\n" + ctx.domain_text.rstrip(),
        "Initial state:\n" + _props(ctx.init),
        "Goal:\n" + _props(ctx.goal),
        "Proposition set:\n" + ("\n".join(str(l) for l in sorted(ctx.literals, key=Literal.sort_key))
                                or "(none)"),
        "Candidate actions:\n" + "\n".join(render_action_line(a) for a in ctx.candidates),
    ]
    if ctx.constraints:
        parts.append("Mutually exclusive action pairs:\n" + "\n".join(
            f"{render_action_line(a)} | {render_action_line(b)} ({why})"
            for a, b, why in ctx.constraints))
    parts.append(PRUNE_INSTRUCTION if ctx.phase == PRUNE else SORT_INSTRUCTION)
    parts.append("Example of output format:\n" + FORMAT_EXAMPLE)
    return "\n\n".join(parts) + "\n"


class Advisor:
    name = "advisor"
    passthrough = False

    def prune(self, ctx: AdviceContext) -> AdvisorDecision:
        raise NotImplementedError

    def order(self, ctx: AdviceContext) -> AdvisorDecision:
        raise NotImplementedError


class PassthroughAdvisor(Advisor):
    """Keeps everything and leaves the canonical order alone (classical Graphplan)."""

    name = "passthrough"
    passthrough = True

    def prune(self, ctx):
        return AdvisorDecision(tuple(ctx.candidates))

    def order(self, ctx):
        return AdvisorDecision(tuple(sorted(ctx.candidates)))


class RejectAllAdvisor(Advisor):
    """Adversarial advisor: rejects every candidate and orders them backwards."""

    name = "reject-all"

    def prune(self, ctx):
        return AdvisorDecision(())

    def order(self, ctx):
        return AdvisorDecision(tuple(sorted(ctx.candidates, reverse=True)))


class HeuristicAdvisor(Advisor):
    """Deterministic stand-in for a language model.

    Pruning keeps candidates that are backward-relevant to the goal: starting
    from the goal propositions, an action is relevant when it newly achieves
    (adds without requiring) a relevant proposition, and its preconditions then
    become relevant.  Ordering ranks by how many current subgoals an action adds.
    """

    name = "heuristic"

    def __init__(self):
        self._lock = threading.Lock()
        self._cache: dict[int, tuple[GroundTask, frozenset[GroundAction]]] = {}

    def relevant_actions(self, task: GroundTask) -> frozenset[GroundAction]:
        with self._lock:
            hit = self._cache.get(id(task))
            if hit is not None and hit[0] is task:
                return hit[1]
        achievers = defaultdict(list)
        for a in task.actions:
            for p in a.add - a.pre:
                achievers[p].append(a)
        relevant_props = set(task.problem.goal)
        queue = list(relevant_props)
        chosen = set()
        while queue:
            p = queue.pop()
            for a in achievers.get(p, ()):
                if a in chosen:
                    continue
                chosen.add(a)
                for q in a.pre:
                    if q not in relevant_props:
                        relevant_props.add(q)
                        queue.append(q)
        result = frozenset(chosen)
        with self._lock:
            self._cache = {id(task): (task, result)}
        return result

    def prune(self, ctx):
        if ctx.task is None:
            raise AdvisorError("heuristic advisor needs the ground task in its context")
        relevant = self.relevant_actions(ctx.task)
        return AdvisorDecision(tuple(a for a in ctx.candidates if a in relevant))

    def order(self, ctx):
        wanted = {l.prop for l in ctx.subgoals if l.positive}

        def key(a: GroundAction):
            return (a.is_noop, -len(a.add & wanted), a.key)

        return AdvisorDecision(tuple(sorted(ctx.candidates, key=key)))


def fixture_key(phase: str, level: int) -> str:
    return f"{phase}:{level}"


class ReplayAdvisor(Advisor):
    """Replays recorded responses keyed by ``phase:level``.

    Each key holds a list of response texts served in call order; the last one
    is repeated once the list runs out.
    """

    name = "fixture"

    def __init__(self, responses: dict[str, list[str]]):
        self.responses = {k: list(v) for k, v in responses.items()}
        self._served: dict[str, int] = defaultdict(int)
        self._lock = threading.Lock()

    @classmethod
    def from_fixture(cls, fixture: dict[str, list[str]]) -> "ReplayAdvisor":
        return cls({k: ["\n".join(lines)] for k, lines in fixture.items()})

    @classmethod
    def from_file(cls, path) -> "ReplayAdvisor":
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
        if not isinstance(data, dict) or not all(
                isinstance(v, list) and all(isinstance(s, str) for s in v) for v in data.values()):
            raise FixtureError(f"{path}: expected a JSON object of string arrays")
        return cls.from_fixture(data)

    @classmethod
    def from_transcript(cls, records: Iterable[dict]) -> "ReplayAdvisor":
        responses: dict[str, list[str]] = defaultdict(list)
        for r in records:
            responses[fixture_key(r["phase"], r["level"])].append(r["response"])
        return cls(dict(responses))

    def _decide(self, ctx: AdviceContext) -> AdvisorDecision:
        key = fixture_key(ctx.phase, ctx.level)
        with self._lock:
            texts = self.responses.get(key)
            if not texts:
                raise FixtureError(f"fixture has no entry for {key}")
            i = min(self._served[key], len(texts) - 1)
            self._served[key] += 1
        parsed = parse_action_lines(texts[i], ctx.candidates)
        return AdvisorDecision(tuple(parsed.actions), texts[i], key, parsed.skipped)

    def prune(self, ctx):
        return self._decide(ctx)

    def order(self, ctx):
        return self._decide(ctx)


class LLMAdvisor(Advisor):
    """Asks a chat-completion model, one call per level and phase."""

    name = "llm"

    def __init__(self, client, include_constraints: bool = False):
        self.client = client
        self.include_constraints = include_constraints
        self.transcripts: list[dict] = []
        self._lock = threading.Lock()

    def _decide(self, ctx: AdviceContext) -> AdvisorDecision:
        if not self.include_constraints and ctx.constraints:
            ctx = AdviceContext(ctx.phase, ctx.level, ctx.domain_text, ctx.init, ctx.goal,
                                ctx.literals, ctx.candidates, ctx.subgoals, None, ctx.task)
        prompt = build_prompt(ctx)
        text = self.client.complete(prompt)
        tid = uuid.uuid4().hex
        with self._lock:
            self.transcripts.append({"id": tid, "phase": ctx.phase, "level": ctx.level,
                                     "prompt": prompt, "response": text})
        parsed = parse_action_lines(text, ctx.candidates)
        return AdvisorDecision(tuple(parsed.actions), text, tid, parsed.skipped)

    def prune(self, ctx):
        return self._decide(ctx)

    def order(self, ctx):
        return self._decide(ctx)

    def dump_transcripts(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.transcripts, fh, indent=2)
