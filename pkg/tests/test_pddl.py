import json

import pytest
from hypothesis import given, settings, strategies as st

from guidedplan.pddl import (NegativePreconditionError, PDDLSyntaxError, UndeclaredSymbolError,
                             UnsupportedRequirementError, condition_literals, corrupt_domain,
                             parse_domain, parse_plan, parse_problem, removal_count,
                             serialize_domain, serialize_problem)
from guidedplan.strips import Proposition, validate

VAC = """(define (domain vac) (:requirements :strips)
  (:predicates (dirty) (clean))
  (:action suck :parameters () :precondition (dirty) :effect (and (clean) (not (dirty)))))"""


def test_parse_vacuum_like_domain():
    d = parse_domain(VAC)
    s = d.schema("suck")
    assert s.name == "SUCK" and len(s.pre) == 1 and len(s.add) == 1 and len(s.delete) == 1


def test_single_goal_without_and():
    d = parse_domain(VAC)
    p = parse_problem("(define (problem x) (:domain vac) (:init (dirty)) (:goal (clean)))", d)
    assert p.goal == {Proposition("clean")}


@pytest.mark.parametrize("text, err", [
    ("(define (domain d) (:requirements :typing))", UnsupportedRequirementError),
    ("(define (domain d) (:types a))", UnsupportedRequirementError),
    ("(define (domain d) (:predicates (p)) (:action a :precondition (not (p))))",
     NegativePreconditionError),
    ("(define (domain d) (:predicates (p)) (:action a :effect (q)))", UndeclaredSymbolError),
    ("(define (domain d) (:predicates (p)", PDDLSyntaxError),
])
def test_rejections(text, err):
    with pytest.raises(err):
        parse_domain(text)


def test_error_carries_position():
    with pytest.raises(UndeclaredSymbolError) as e:
        parse_domain("(define (domain d)\n (:predicates (p))\n (:action a :effect (q)))")
    assert e.value.span is not None and e.value.span.line == 3


def test_round_trip_bundled(data_dir):
    for dom_path in sorted(data_dir.glob("*/domain.pddl")):
        d = parse_domain(dom_path.read_text())
        again = parse_domain(serialize_domain(d))
        assert again == d
        for prob_path in sorted(dom_path.parent.glob("*.pddl")):
            if prob_path.name == "domain.pddl":
                continue
            p = parse_problem(prob_path.read_text(), d)
            q = parse_problem(serialize_problem(p), d)
            assert (q.init, q.goal, q.objects) == (p.init, p.goal, p.objects)


def test_logistics_has_43_condition_literals(logistics02):
    entries = condition_literals(logistics02.domain)
    per_schema = {}
    for schema, _, _ in entries:
        per_schema[schema] = per_schema.get(schema, 0) + 1
    assert len(entries) == 43
    assert sorted(per_schema.values()) == [6, 7, 7, 7, 7, 9]


@pytest.mark.parametrize("p, k", [(0.1, 4), (0.2, 9), (0.3, 13), (0.4, 17), (0.5, 22)])
def test_removal_counts_for_logistics(logistics02, p, k):
    assert removal_count(p, 43) == k
    _, report = corrupt_domain(logistics02.domain, p, seed=7)
    assert len(report.removed) == k


def test_removal_count_edge_cases():
    assert removal_count(0.0, 43) == 0
    assert removal_count(0.001, 43) == 1
    assert removal_count(0.5, 5) == 3  # 2.5 rounds up


def test_corruption_is_seed_deterministic(logistics02):
    a, ra = corrupt_domain(logistics02.domain, 0.3, seed=11)
    b, rb = corrupt_domain(logistics02.domain, 0.3, seed=11)
    c, _ = corrupt_domain(logistics02.domain, 0.3, seed=12)
    assert serialize_domain(a) == serialize_domain(b)
    assert ra.dumps() == rb.dumps()
    assert serialize_domain(a) != serialize_domain(c)


def test_zero_proportion_is_identity(logistics02):
    outs = {serialize_domain(corrupt_domain(logistics02.domain, 0.0, s)[0]) for s in range(5)}
    assert outs == {serialize_domain(logistics02.domain)}


@settings(max_examples=40, deadline=None)
@given(st.floats(0.01, 1.0), st.integers(0, 2**32))
def test_corruption_removes_exactly_the_reported_atoms(p, seed):
    d = parse_domain(VAC)
    bad, report = corrupt_domain(d, p, seed)
    assert len(condition_literals(bad)) == report.total - len(report.removed)
    assert json.loads(report.dumps())["total_condition_literals"] == report.total


def test_parse_plan_text_and_json(logistics02, data_dir):
    text = (data_dir / "logistics" / "logistics-02.plan").read_text()
    plan = parse_plan(text, logistics02)
    assert len(plan) == 10 and validate(logistics02, plan)
    again = parse_plan(json.dumps(plan.to_json()), logistics02)
    assert again == plan


def test_parse_plan_rejects_unknown_action(logistics02):
    with pytest.raises(UndeclaredSymbolError):
        parse_plan("(TELEPORT p0 l11)\n", logistics02)
