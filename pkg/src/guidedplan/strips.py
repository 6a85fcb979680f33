"""STRIPS world model: propositions, schemas, ground actions, states and plans."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Optional

DOMAIN = "domain"
NOOP = "noop"


class ModelError(ValueError):
    """A schema or problem violates a structural invariant."""


class UnboundVariableError(ModelError):
    def __init__(self, schema: str, variable: str):
        super().__init__(f"schema {schema}: variable {variable} is not a parameter")
        self.schema = schema
        self.variable = variable


class InapplicableActionError(ValueError):
    def __init__(self, action: "GroundAction", missing: Iterable["Proposition"]):
        self.action = action
        self.missing = frozenset(missing)
        shown = " ".join(str(p) for p in sorted(self.missing))
        super().__init__(f"{action} is not applicable; missing {shown}")


class LayerConflictError(ValueError):
    def __init__(self, first: "GroundAction", second: "GroundAction", rule: str):
        self.pair = (first, second)
        self.rule = rule
        super().__init__(f"{first} and {second} conflict ({rule})")


class Proposition(NamedTuple):
    predicate: str
    args: tuple[str, ...] = ()

    def __str__(self) -> str:
        return "(" + " ".join((self.predicate,) + self.args) + ")"


class Literal(NamedTuple):
    prop: Proposition
    positive: bool = True

    def neg(self) -> "Literal":
        return Literal(self.prop, not self.positive)

    def sort_key(self):
        return (self.prop.predicate, self.prop.args, not self.positive)

    def __str__(self) -> str:
        return str(self.prop) if self.positive else f"(not {self.prop})"


def pos(predicate: str, *args: str) -> Literal:
    return Literal(Proposition(predicate, tuple(args)), True)


def neg(literal: Literal) -> Literal:
    return literal.neg()


@dataclass(frozen=True, order=True)
class Atom:
    """A predicate applied to variables, e.g. ``(at ?obj ?loc)``."""

    predicate: str
    params: tuple[str, ...] = ()

    def __post_init__(self):
        if not self.predicate:
            raise ModelError("atom predicate must be nonempty")
        for p in self.params:
            if not p.startswith("?"):
                raise ModelError(f"atom ({self.predicate} ...): term {p!r} is not a variable")

    def bind(self, binding: dict[str, str]) -> Proposition:
        return Proposition(self.predicate, tuple(binding[p] for p in self.params))

    def __str__(self) -> str:
        return "(" + " ".join((self.predicate,) + self.params) + ")"


@dataclass(frozen=True)
class ActionSchema:
    name: str
    params: tuple[str, ...]
    pre: frozenset[Atom] = frozenset()
    add: frozenset[Atom] = frozenset()
    delete: frozenset[Atom] = frozenset()

    def __post_init__(self):
        if len(set(self.params)) != len(self.params):
            raise ModelError(f"schema {self.name}: duplicate parameter")
        known = set(self.params)
        for atom in sorted(self.pre | self.add | self.delete):
            for v in atom.params:
                if v not in known:
                    raise UnboundVariableError(self.name, v)
        overlap = self.add & self.delete
        if overlap:
            raise ModelError(f"schema {self.name}: {min(overlap)} is both added and deleted")

    @property
    def arity(self) -> int:
        return len(self.params)

    def instantiate(self, args: tuple[str, ...]) -> "GroundAction":
        if len(args) != len(self.params):
            raise ModelError(f"{self.name} expects {len(self.params)} arguments, got {len(args)}")
        binding = dict(zip(self.params, args))
        add = frozenset(a.bind(binding) for a in self.add)
        # Add-after-delete: a binding that both deletes and adds p leaves p true.
        delete = frozenset(a.bind(binding) for a in self.delete) - add
        return GroundAction(
            self.name, tuple(args), self.params,
            frozenset(a.bind(binding) for a in self.pre), add, delete,
        )


@dataclass(frozen=True, eq=False)
class GroundAction:
    """An instantiated schema, or a maintenance (noop) action over one literal."""

    name: str
    args: tuple[str, ...]
    params: tuple[str, ...]
    pre: frozenset[Proposition]
    add: frozenset[Proposition]
    delete: frozenset[Proposition]
    literal: Optional[Literal] = None
    key: tuple = field(init=False, repr=False)
    pre_literals: frozenset[Literal] = field(init=False, repr=False)
    effects: frozenset[Literal] = field(init=False, repr=False)
    _hash: int = field(init=False, repr=False)

    def __post_init__(self):
        if self.literal is None:
            if self.add & self.delete:
                raise ModelError(f"{self.name}{self.args}: add and delete overlap")
            key = (0, self.name, self.args)
            pre = frozenset(Literal(p, True) for p in self.pre)
            eff = frozenset(Literal(p, True) for p in self.add) | frozenset(
                Literal(p, False) for p in self.delete)
        else:
            key = (1,) + self.literal.sort_key()
            pre = eff = frozenset((self.literal,))
        object.__setattr__(self, "key", key)
        object.__setattr__(self, "pre_literals", pre)
        object.__setattr__(self, "effects", eff)
        object.__setattr__(self, "_hash", hash(key))

    @classmethod
    def noop(cls, literal: Literal) -> "GroundAction":
        props = frozenset((literal.prop,)) if literal.positive else frozenset()
        return cls("NOOP", (), (), props, props, frozenset(), literal)

    @property
    def kind(self) -> str:
        return NOOP if self.literal is not None else DOMAIN

    @property
    def is_noop(self) -> bool:
        return self.literal is not None

    @property
    def binding(self) -> dict[str, str]:
        return dict(zip(self.params, self.args))

    def __eq__(self, other):
        return isinstance(other, GroundAction) and self.key == other.key

    def __hash__(self):
        return self._hash

    def __lt__(self, other: "GroundAction"):
        return self.key < other.key

    def __str__(self) -> str:
        if self.literal is not None:
            return f"noop{self.literal}"
        return "(" + " ".join((self.name,) + self.args) + ")"

    __repr__ = __str__


State = frozenset  # frozenset[Proposition]; closed world


@dataclass(frozen=True)
class Domain:
    name: str
    predicates: tuple[Atom, ...]
    schemas: tuple[ActionSchema, ...]
    requirements: tuple[str, ...] = (":strips",)

    def schema(self, name: str) -> ActionSchema:
        for s in self.schemas:
            if s.name == name.upper():
                return s
        raise KeyError(name)

    @property
    def arities(self) -> dict[str, int]:
        return {a.predicate: len(a.params) for a in self.predicates}


@dataclass(frozen=True)
class PlanningProblem:
    name: str
    domain: Domain
    objects: tuple[str, ...]
    init: frozenset[Proposition]
    goal: frozenset[Proposition]

    def __post_init__(self):
        if not self.goal:
            raise ModelError(f"problem {self.name}: goal is empty")
        arities = self.domain.arities
        objs = set(self.objects)
        for p in sorted(self.init | self.goal):
            if p.predicate not in arities:
                raise ModelError(f"problem {self.name}: undeclared predicate {p.predicate}")
            if len(p.args) != arities[p.predicate]:
                raise ModelError(f"problem {self.name}: arity mismatch in {p}")
            for a in p.args:
                if a not in objs:
                    raise ModelError(f"problem {self.name}: undeclared object {a}")

    @property
    def schemas(self) -> tuple[ActionSchema, ...]:
        return self.domain.schemas

    @property
    def predicates(self) -> tuple[Atom, ...]:
        return self.domain.predicates


@dataclass(frozen=True)
class LayeredPlan:
    layers: tuple[frozenset[GroundAction], ...]

    @classmethod
    def of(cls, layers: Iterable[Iterable[GroundAction]]) -> "LayeredPlan":
        return cls(tuple(frozenset(layer) for layer in layers))

    def __len__(self) -> int:
        return len(self.layers)

    @property
    def actions(self) -> list[GroundAction]:
        return [a for layer in self.layers for a in sorted(layer)]

    def to_text(self) -> str:
        return "".join(" ".join(str(a) for a in sorted(layer)) + "\n" for layer in self.layers)

    def to_json(self) -> dict:
        return {"layers": [[str(a) for a in sorted(layer)] for layer in self.layers]}


@dataclass(frozen=True)
class Verdict:
    valid: bool
    failed_layer: Optional[int] = None
    reason: str = ""

    def __bool__(self) -> bool:
        return self.valid


def ground_all(problem: PlanningProblem) -> list[GroundAction]:
    """Every binding of every schema's parameters to declared objects (no noops)."""
    out = []
    for schema in problem.schemas:
        for args in itertools.product(problem.objects, repeat=schema.arity):
            out.append(schema.instantiate(args))
    return out


def applicable(state: State, action: GroundAction) -> bool:
    return action.pre <= state


def apply(state: State, action: GroundAction) -> State:
    if not action.pre <= state:
        raise InapplicableActionError(action, action.pre - state)
    return (state - action.delete) | action.add


def layer_conflict(a: GroundAction, b: GroundAction) -> Optional[str]:
    """Name the rule under which a and b cannot share a layer, or None."""
    if a.delete & b.add or b.delete & a.add:
        return "inconsistent-effects"
    if a.delete & b.pre or b.delete & a.pre:
        return "interference"
    return None


def apply_layer(state: State, layer: Iterable[GroundAction]) -> State:
    actions = sorted(layer)
    for a in actions:
        if not a.pre <= state:
            raise InapplicableActionError(a, a.pre - state)
    for a, b in itertools.combinations(actions, 2):
        rule = layer_conflict(a, b)
        if rule:
            raise LayerConflictError(a, b, rule)
    deleted = frozenset().union(*(a.delete for a in actions))
    added = frozenset().union(*(a.add for a in actions))
    return (state - deleted) | added


def validate(problem: PlanningProblem, plan: LayeredPlan) -> Verdict:
    state = frozenset(problem.init)
    for i, layer in enumerate(plan.layers):
        try:
            state = apply_layer(state, layer)
        except (InapplicableActionError, LayerConflictError) as e:
            return Verdict(False, i, str(e))
    missing = problem.goal - state
    if missing:
        return Verdict(False, len(plan.layers),
                       "goal not reached: " + " ".join(str(p) for p in sorted(missing)))
    return Verdict(True)


def ground_static(problem: PlanningProblem, effected: Optional[set] = None) -> list[GroundAction]:
    """Like ground_all, but bindings violating a static precondition are cut early."""
    if effected is None:
        effected = {a.predicate for s in problem.schemas for a in s.add | s.delete}
    init = problem.init
    out = []
    for schema in problem.schemas:
        static = [a for a in schema.pre if a.predicate not in effected]
        # check each static atom as soon as its last variable gets bound
        order = sorted(schema.params, key=lambda v: -sum(v in a.params for a in static))
        checks: list[list[Atom]] = [[] for _ in order]
        for a in static:
            last = max((order.index(v) for v in a.params), default=-1)
            if last < 0:
                if Proposition(a.predicate, ()) not in init:
                    break
            else:
                checks[last].append(a)
        else:
            binding: dict[str, str] = {}

            def rec(i: int):
                if i == len(order):
                    out.append(schema.instantiate(tuple(binding[p] for p in schema.params)))
                    return
                for obj in problem.objects:
                    binding[order[i]] = obj
                    if all(a.bind(binding) in init for a in checks[i]):
                        rec(i + 1)
                binding.pop(order[i], None)

            rec(0)
    return out


def relaxed_reachable(problem: PlanningProblem,
                      actions: Optional[Iterable[GroundAction]] = None) -> list[GroundAction]:
    """Ground actions reachable when deletes are ignored, in canonical order."""
    effected = {a.predicate for s in problem.schemas for a in s.add | s.delete}
    if actions is None:
        actions = ground_static(problem, effected)
    init = problem.init
    pending = []
    for a in actions:
        # static preconditions can be decided against the initial state once
        if all(p in init for p in a.pre if p.predicate not in effected):
            pending.append(a)
    reached = set(init)
    chosen = []
    changed = True
    while changed:
        changed = False
        rest = []
        for a in pending:
            if a.pre <= reached:
                chosen.append(a)
                if not a.add <= reached:
                    reached |= a.add
                    changed = True
            else:
                rest.append(a)
        pending = rest
    return sorted(chosen)


@dataclass
class GroundTask:
    """A problem together with its reachable ground actions and proposition set."""

    problem: PlanningProblem
    actions: tuple[GroundAction, ...]
    propositions: frozenset[Proposition]
    _domain_text: Optional[str] = field(default=None, repr=False)

    @classmethod
    def build(cls, problem: PlanningProblem) -> "GroundTask":
        actions = tuple(relaxed_reachable(problem))
        props = set(problem.init) | set(problem.goal)
        for a in actions:
            props |= a.pre | a.add | a.delete
        return cls(problem, actions, frozenset(props))

    @property
    def domain_text(self) -> str:
        if self._domain_text is None:
            from .pddl import serialize_domain
            self._domain_text = serialize_domain(self.problem.domain)
        return self._domain_text
