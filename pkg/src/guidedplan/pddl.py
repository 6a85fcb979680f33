"""Reader/writer for the STRIPS subset of PDDL, plus seeded domain corruption.

Grammar accepted (case-insensitive, ``;`` comments)::

    domain  := (define (domain NAME) [(:requirements :strips)]
                       [(:predicates ATOMDECL*)] ACTION*)
    ACTION  := (:action NAME [:parameters (VAR*)]
                             [:precondition COND] [:effect EFFECT])
    COND    := () | ATOM | (and ATOM*)
    EFFECT  := () | LIT | (and LIT*)        LIT := ATOM | (not ATOM)
    problem := (define (problem NAME) (:domain NAME) [(:objects NAME*)]
                       (:init GROUNDATOM*) (:goal GROUNDATOM | (and GROUNDATOM*)))

Action names are upper-cased; predicates, variables and objects are lower-cased.
"""
from __future__ import annotations

import json
import math
import random
import re
from dataclasses import dataclass, field, replace
from typing import Iterator, Optional, Union

from .strips import (Atom, ActionSchema, Domain, LayeredPlan, ModelError, PlanningProblem,
                     Proposition)

SUPPORTED_REQUIREMENTS = (":strips",)


@dataclass(frozen=True)
class SourceSpan:
    start: int
    end: int
    line: int
    column: int

    def __str__(self) -> str:
        return f"line {self.line}, column {self.column}"


class PDDLError(ValueError):
    def __init__(self, message: str, span: Optional[SourceSpan] = None):
        self.span = span
        super().__init__(f"{message} ({span})" if span else message)


class PDDLSyntaxError(PDDLError):
    pass


class UnsupportedRequirementError(PDDLError):
    pass


class NegativePreconditionError(PDDLError):
    pass


class UndeclaredSymbolError(PDDLError):
    pass


class Token(str):
    span: SourceSpan


class SExpr(list):
    span: SourceSpan


Node = Union[Token, SExpr]


def _tokens(text: str) -> Iterator[Token]:
    i, line, col = 0, 1, 1
    n = len(text)
    while i < n:
        c = text[i]
        if c == "\n":
            i, line, col = i + 1, line + 1, 1
        elif c.isspace():
            i, col = i + 1, col + 1
        elif c == ";":
            while i < n and text[i] != "\n":
                i += 1
        elif c in "()":
            tok = Token(c)
            tok.span = SourceSpan(i, i + 1, line, col)
            yield tok
            i, col = i + 1, col + 1
        else:
            j = i
            while j < n and not text[j].isspace() and text[j] not in "();":
                j += 1
            tok = Token(text[i:j])
            tok.span = SourceSpan(i, j, line, col)
            yield tok
            col += j - i
            i = j


def read_sexpr(text: str) -> SExpr:
    """Parse a single top-level s-expression."""
    stack: list[SExpr] = []
    result = None
    for tok in _tokens(text):
        if result is not None:
            raise PDDLSyntaxError("trailing input after top-level expression", tok.span)
        if tok == "(":
            node = SExpr()
            node.span = tok.span
            stack.append(node)
        elif tok == ")":
            if not stack:
                raise PDDLSyntaxError("unbalanced ')'", tok.span)
            node = stack.pop()
            node.span = SourceSpan(node.span.start, tok.span.end, node.span.line, node.span.column)
            if stack:
                stack[-1].append(node)
            else:
                result = node
        else:
            if not stack:
                raise PDDLSyntaxError(f"unexpected token {tok!r} outside parentheses", tok.span)
            low = Token(tok.lower())
            low.span = tok.span
            stack[-1].append(low)
    if stack:
        raise PDDLSyntaxError("unexpected end of input: unclosed '('", stack[-1].span)
    if result is None:
        raise PDDLSyntaxError("empty input")
    return result


def _span(node) -> Optional[SourceSpan]:
    return getattr(node, "span", None)


def _expect_list(node: Node, what: str) -> SExpr:
    if not isinstance(node, SExpr):
        raise PDDLSyntaxError(f"expected {what}, found {node!r}", _span(node))
    return node


def _expect_name(node: Node, what: str) -> str:
    if isinstance(node, SExpr) or str(node).startswith((":", "?")):
        raise PDDLSyntaxError(f"expected {what}, found {node!r}", _span(node))
    return str(node)


def _header(tree: SExpr, kind: str) -> str:
    if len(tree) < 2 or tree[0] != "define":
        raise PDDLSyntaxError("expected (define ...)", tree.span)
    head = _expect_list(tree[1], f"({kind} NAME)")
    if len(head) != 2 or head[0] != kind:
        raise PDDLSyntaxError(f"expected ({kind} NAME)", head.span)
    return _expect_name(head[1], f"{kind} name")


def _atom(node: Node, variables: Optional[set] = None) -> Atom:
    node = _expect_list(node, "atom")
    if not node or isinstance(node[0], SExpr):
        raise PDDLSyntaxError("expected predicate name", node.span)
    pred = str(node[0])
    if pred in ("and", "or", "not", "forall", "exists", "when", "imply", "="):
        raise PDDLSyntaxError(f"unsupported construct ({pred} ...)", node.span)
    terms = []
    for t in node[1:]:
        if isinstance(t, SExpr):
            raise PDDLSyntaxError("nested expression inside atom", t.span)
        if not t.startswith("?"):
            raise PDDLSyntaxError(f"constant {t!r} in action body is not supported", t.span)
        if variables is not None and t not in variables:
            raise PDDLError(f"unbound variable {t}", t.span)
        terms.append(str(t))
    return Atom(pred, tuple(terms))


def _conjuncts(node: Node) -> list[Node]:
    node = _expect_list(node, "condition")
    if not node:
        return []
    if node[0] == "and":
        return list(node[1:])
    return [node]


def _parse_action(node: SExpr, arities: dict[str, int]) -> ActionSchema:
    if len(node) < 2:
        raise PDDLSyntaxError("action without a name", node.span)
    name = _expect_name(node[1], "action name").upper()
    params: list[str] = []
    pre, add, delete = set(), set(), set()
    body = list(node[2:])
    if len(body) % 2:
        raise PDDLSyntaxError(f"action {name}: keyword without value", node.span)
    sections = {}
    for key, value in zip(body[0::2], body[1::2]):
        if key not in (":parameters", ":precondition", ":effect"):
            raise PDDLSyntaxError(f"action {name}: unknown section {key}", _span(key))
        sections[str(key)] = value
    if ":parameters" in sections:
        plist = _expect_list(sections[":parameters"], "parameter list")
        for p in plist:
            if isinstance(p, SExpr) or not p.startswith("?"):
                if p == "-":
                    raise PDDLSyntaxError(f"action {name}: typed parameters are not supported", p.span)
                raise PDDLSyntaxError(f"action {name}: expected variable, found {p!r}", _span(p))
            if p in params:
                raise PDDLSyntaxError(f"action {name}: duplicate parameter {p}", p.span)
            params.append(str(p))
    known = set(params)

    def check(atom: Atom, where: Node):
        if atom.predicate not in arities:
            raise UndeclaredSymbolError(f"action {name}: undeclared predicate {atom.predicate}",
                                        _span(where))
        if len(atom.params) != arities[atom.predicate]:
            raise PDDLError(f"action {name}: arity mismatch in {atom}", _span(where))

    if ":precondition" in sections:
        for c in _conjuncts(sections[":precondition"]):
            c = _expect_list(c, "precondition atom")
            if c and c[0] == "not":
                raise NegativePreconditionError(
                    f"action {name}: negative preconditions are not supported", c.span)
            try:
                atom = _atom(c, known)
            except PDDLError as e:
                raise PDDLError(f"action {name}: {e}", e.span) from e
            check(atom, c)
            pre.add(atom)
    if ":effect" in sections:
        for c in _conjuncts(sections[":effect"]):
            c = _expect_list(c, "effect literal")
            target = add
            if c and c[0] == "not":
                if len(c) != 2:
                    raise PDDLSyntaxError("(not ...) takes one atom", c.span)
                target, c = delete, c[1]
            try:
                atom = _atom(c, known)
            except PDDLError as e:
                raise PDDLError(f"action {name}: {e}", e.span) from e
            check(atom, c)
            target.add(atom)
    try:
        return ActionSchema(name, tuple(params), frozenset(pre), frozenset(add), frozenset(delete))
    except ModelError as e:
        raise PDDLError(str(e), node.span) from e


def parse_domain(text: str) -> Domain:
    tree = read_sexpr(text)
    name = _header(tree, "domain")
    requirements: list[str] = []
    predicates: list[Atom] = []
    arities: dict[str, int] = {}
    schemas: list[ActionSchema] = []
    for section in tree[2:]:
        section = _expect_list(section, "domain section")
        if not section:
            raise PDDLSyntaxError("empty domain section", section.span)
        key = section[0]
        if key == ":requirements":
            for r in section[1:]:
                if r not in SUPPORTED_REQUIREMENTS:
                    raise UnsupportedRequirementError(f"unsupported requirement {r}", _span(r))
                requirements.append(str(r))
        elif key == ":predicates":
            for decl in section[1:]:
                atom = _atom(decl)
                if len(set(atom.params)) != len(atom.params):
                    raise PDDLSyntaxError(f"predicate {atom.predicate}: repeated parameter", decl.span)
                if atom.predicate in arities:
                    raise PDDLSyntaxError(f"predicate {atom.predicate} declared twice", decl.span)
                arities[atom.predicate] = len(atom.params)
                predicates.append(atom)
        elif key == ":action":
            schema = _parse_action(section, arities)
            if any(s.name == schema.name for s in schemas):
                raise PDDLSyntaxError(f"action {schema.name} defined twice", section.span)
            schemas.append(schema)
        elif key in (":types", ":constants", ":functions", ":derived", ":durative-action"):
            raise UnsupportedRequirementError(f"unsupported section {key}", _span(key))
        else:
            raise PDDLSyntaxError(f"unknown domain section {key}", _span(key))
    return Domain(name, tuple(predicates), tuple(schemas), tuple(requirements) or (":strips",))


def _ground(node: Node, domain: Domain, objects: set, where: str) -> Proposition:
    node = _expect_list(node, f"{where} atom")
    if not node or isinstance(node[0], SExpr):
        raise PDDLSyntaxError(f"malformed {where} atom", node.span)
    pred = str(node[0])
    if pred == "not":
        raise PDDLError(f"negative literal in {where} is not supported", node.span)
    if pred in ("and", "or", "forall", "exists"):
        raise PDDLSyntaxError(f"unsupported construct ({pred} ...) in {where}", node.span)
    arities = domain.arities
    if pred not in arities:
        raise UndeclaredSymbolError(f"undeclared predicate {pred} in {where}", node.span)
    args = []
    for a in node[1:]:
        a = _expect_name(a, "object name")
        if a not in objects:
            raise UndeclaredSymbolError(f"undeclared object {a} in {where}", _span(a))
        args.append(a)
    if len(args) != arities[pred]:
        raise PDDLError(f"arity mismatch: {pred} takes {arities[pred]} arguments", node.span)
    return Proposition(pred, tuple(args))


def parse_problem(text: str, domain: Domain) -> PlanningProblem:
    tree = read_sexpr(text)
    name = _header(tree, "problem")
    objects: list[str] = []
    init_nodes = goal_node = None
    for section in tree[2:]:
        section = _expect_list(section, "problem section")
        if not section:
            raise PDDLSyntaxError("empty problem section", section.span)
        key = section[0]
        if key == ":domain":
            if len(section) != 2 or section[1] != domain.name.lower():
                raise PDDLError(f"problem {name} is for domain {section[1:]}, not {domain.name}",
                                section.span)
        elif key == ":objects":
            for o in section[1:]:
                if o == "-":
                    raise PDDLSyntaxError("typed objects are not supported", o.span)
                o = _expect_name(o, "object name")
                if o not in objects:
                    objects.append(o)
        elif key == ":init":
            init_nodes = section[1:]
        elif key == ":goal":
            if len(section) != 2:
                raise PDDLSyntaxError("(:goal ...) takes one formula", section.span)
            goal_node = section[1]
        elif key == ":requirements":
            for r in section[1:]:
                if r not in SUPPORTED_REQUIREMENTS:
                    raise UnsupportedRequirementError(f"unsupported requirement {r}", _span(r))
        else:
            raise PDDLSyntaxError(f"unknown problem section {key}", _span(key))
    if init_nodes is None:
        raise PDDLSyntaxError(f"problem {name}: missing :init", tree.span)
    if goal_node is None:
        raise PDDLSyntaxError(f"problem {name}: missing :goal", tree.span)
    objset = set(objects)
    init = frozenset(_ground(n, domain, objset, "init") for n in init_nodes)
    goal = frozenset(_ground(n, domain, objset, "goal") for n in _conjuncts(goal_node))
    if not goal:
        raise PDDLError(f"problem {name}: empty goal", _span(goal_node))
    return PlanningProblem(name, domain, tuple(objects), init, goal)


def _conj(items: list[str], indent: str) -> str:
    if not items:
        return "()"
    if len(items) == 1:
        return items[0]
    return "(and " + ("\n" + indent + "     ").join(items) + ")"


def serialize_domain(domain: Domain) -> str:
    lines = [f"(define (domain {domain.name})",
             "  (:requirements " + " ".join(domain.requirements) + ")"]
    if domain.predicates:
        lines.append("  (:predicates")
        lines.extend(f"    {a}" for a in domain.predicates)
        lines[-1] += ")"
    else:
        lines.append("  (:predicates)")
    for s in domain.schemas:
        lines.append(f"  (:action {s.name}")
        lines.append("    :parameters (" + " ".join(s.params) + ")")
        lines.append("    :precondition " + _conj([str(a) for a in sorted(s.pre)], "    "))
        effects = [str(a) for a in sorted(s.add)] + [f"(not {a})" for a in sorted(s.delete)]
        lines.append("    :effect " + _conj(effects, "    ") + ")")
    lines[-1] += ")"
    return "\n".join(lines) + "\n"


def serialize_problem(problem: PlanningProblem) -> str:
    lines = [f"(define (problem {problem.name})",
             f"  (:domain {problem.domain.name})",
             "  (:objects " + " ".join(problem.objects) + ")",
             "  (:init"]
    lines.extend(f"    {p}" for p in sorted(problem.init))
    lines[-1] += ")"
    goals = sorted(problem.goal)
    if len(goals) == 1:
        lines.append(f"  (:goal {goals[0]})")
    else:
        lines.append("  (:goal (and")
        lines.extend(f"    {p}" for p in goals)
        lines[-1] += "))"
    lines[-1] += ")"
    return "\n".join(lines) + "\n"


SLOTS = ("pre", "add", "del")


@dataclass
class CorruptionReport:
    proportion: float
    seed: int
    total: int
    removed: list[tuple[str, str, Atom]] = field(default_factory=list)
    emptied_preconditions: list[str] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "proportion": self.proportion,
            "seed": self.seed,
            "total_condition_literals": self.total,
            "removed": [{"schema": s, "slot": slot, "atom": str(a)} for s, slot, a in self.removed],
            "emptied_preconditions": list(self.emptied_preconditions),
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2) + "\n"


def condition_literals(domain: Domain) -> list[tuple[str, str, Atom]]:
    """All (schema, slot, atom) condition entries in a fixed canonical order."""
    out = []
    for s in domain.schemas:
        for slot, atoms in zip(SLOTS, (s.pre, s.add, s.delete)):
            out.extend((s.name, slot, a) for a in sorted(atoms))
    return out


def removal_count(proportion: float, total: int) -> int:
    if proportion <= 0 or total == 0:
        return 0
    # round half up; Python's round() would send 2.5 to 2
    return min(total, max(1, math.floor(proportion * total + 0.5)))


def corrupt_domain(domain: Domain, proportion: float, seed: int) -> tuple[Domain, CorruptionReport]:
    """Delete a seeded uniform sample of pre/add/del atoms across all schemas."""
    if not 0 <= proportion <= 1:
        raise ValueError(f"proportion must lie in [0, 1], got {proportion}")
    entries = condition_literals(domain)
    k = removal_count(proportion, len(entries))
    rng = random.Random(seed)
    picked = sorted(rng.sample(range(len(entries)), k))
    removed = [entries[i] for i in picked]
    report = CorruptionReport(proportion, seed, len(entries), removed)
    if not removed:
        return domain, report
    drop = set(removed)
    schemas = []
    for s in domain.schemas:
        pre = frozenset(a for a in s.pre if (s.name, "pre", a) not in drop)
        add = frozenset(a for a in s.add if (s.name, "add", a) not in drop)
        delete = frozenset(a for a in s.delete if (s.name, "del", a) not in drop)
        if s.pre and not pre:
            report.emptied_preconditions.append(s.name)
        schemas.append(replace(s, pre=pre, add=add, delete=delete))
    return replace(domain, schemas=tuple(schemas)), report


def load_domain(path) -> Domain:
    with open(path, encoding="utf-8") as fh:
        return parse_domain(fh.read())


def load_problem(path, domain: Domain) -> PlanningProblem:
    with open(path, encoding="utf-8") as fh:
        return parse_problem(fh.read(), domain)


_PLAN_ACTION = re.compile(r"\(([^()]*)\)")


def parse_plan(text: str, problem: PlanningProblem) -> LayeredPlan:
    """Read a layered plan: one layer per line of ``(NAME arg ...)`` groups, or the JSON form."""
    stripped = text.strip()
    if stripped.startswith("{"):
        try:
            layers = json.loads(stripped)["layers"]
        except (ValueError, KeyError, TypeError) as e:
            raise PDDLError(f"malformed JSON plan: {e}") from e
        lines = [" ".join(layer) for layer in layers]
    else:
        lines = [l.split(";", 1)[0] for l in text.splitlines()]
        lines = [l for l in lines if l.strip()]
    objects = set(problem.objects)
    out = []
    for n, line in enumerate(lines, start=1):
        rest = _PLAN_ACTION.sub("", line).strip()
        if rest:
            raise PDDLError(f"plan line {n}: unexpected text {rest!r}")
        layer = []
        for m in _PLAN_ACTION.finditer(line):
            parts = m.group(1).split()
            if not parts:
                raise PDDLError(f"plan line {n}: empty action")
            try:
                schema = problem.domain.schema(parts[0])
            except KeyError:
                raise UndeclaredSymbolError(f"plan line {n}: unknown action {parts[0]}") from None
            args = tuple(a.lower() for a in parts[1:])
            for a in args:
                if a not in objects:
                    raise UndeclaredSymbolError(f"plan line {n}: unknown object {a}")
            try:
                layer.append(schema.instantiate(args))
            except ModelError as e:
                raise PDDLError(f"plan line {n}: {e}") from e
        out.append(layer)
    return LayeredPlan.of(out)
