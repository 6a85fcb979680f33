import pytest
from hypothesis import given, settings, strategies as st

from guidedplan.strips import (ActionSchema, Atom, GroundAction, InapplicableActionError,
                               LayerConflictError, LayeredPlan, Literal, ModelError,
                               Proposition, UnboundVariableError, apply, apply_layer,
                               ground_all, ground_static, pos, relaxed_reachable, validate)

from oracles import micro_problem


def P(*parts):
    return Proposition(parts[0], tuple(parts[1:]))


def test_atom_rejects_constants():
    with pytest.raises(ModelError):
        Atom("at", ("t0",))


def test_schema_rejects_unbound_variable():
    with pytest.raises(UnboundVariableError) as err:
        ActionSchema("GO", ("?x",), frozenset({Atom("at", ("?y",))}))
    assert err.value.variable == "?y"


def test_schema_rejects_add_delete_overlap():
    a = Atom("at", ("?x",))
    with pytest.raises(ModelError):
        ActionSchema("GO", ("?x",), add=frozenset({a}), delete=frozenset({a}))


def test_self_loop_binding_keeps_the_fact(logistics02):
    drive = logistics02.domain.schema("DRIVE-TRUCK")
    a = drive.instantiate(("t0", "l00", "l00", "c0"))
    assert a.add == {P("at", "t0", "l00")}
    assert a.delete == frozenset()
    state = frozenset({P("truck", "t0"), P("location", "l00"), P("city", "c0"),
                       P("at", "t0", "l00"), P("in-city", "l00", "c0")})
    assert apply(state, a) == state


def test_vacuum_plan_sequentially(vacuum):
    acts = {a.name: a for a in ground_all(vacuum)}
    s = vacuum.init
    for name in ("MOVE2BR", "VACUUM", "MOVE2TR"):
        s = apply(s, acts[name])
    assert vacuum.goal <= s
    with pytest.raises(InapplicableActionError):
        apply(vacuum.init, acts["VACUUM"])


def test_layer_conflicts_are_reported(vacuum):
    acts = {a.name: a for a in ground_all(vacuum)}
    state = vacuum.init | {P("bedroom")}
    with pytest.raises(LayerConflictError) as err:
        apply_layer(state, [acts["MOVE2BR"], acts["MOVE2TR"]])
    assert err.value.rule == "inconsistent-effects"


def test_validate_reports_failing_layer(vacuum):
    acts = {a.name: a for a in ground_all(vacuum)}
    bad = LayeredPlan.of([[acts["VACUUM"]]])
    v = validate(vacuum, bad)
    assert not v.valid and v.failed_layer == 0
    short = LayeredPlan.of([[acts["MOVE2BR"]], [acts["VACUUM"]]])
    v = validate(vacuum, short)
    assert not v.valid and "toolroom" in v.reason
    good = LayeredPlan.of([[acts["MOVE2BR"]], [acts["VACUUM"]], [acts["MOVE2TR"]]])
    assert validate(vacuum, good)


def test_plan_text_and_json(vacuum):
    acts = {a.name: a for a in ground_all(vacuum)}
    plan = LayeredPlan.of([[acts["MOVE2BR"]], [acts["VACUUM"]], [acts["MOVE2TR"]]])
    assert plan.to_text() == "(MOVE2BR)\n(VACUUM)\n(MOVE2TR)\n"
    assert plan.to_json() == {"layers": [["(MOVE2BR)"], ["(VACUUM)"], ["(MOVE2TR)"]]}


def test_canonical_order_puts_noops_last():
    noop = GroundAction.noop(pos("a"))
    act = ActionSchema("Z", ()).instantiate(())
    assert sorted([noop, act]) == [act, noop]
    assert str(GroundAction.noop(Literal(P("a"), False))) == "noop(not (a))"


def test_static_grounding_matches_full_grounding(logistics02):
    full = relaxed_reachable(logistics02, ground_all(logistics02))
    fast = relaxed_reachable(logistics02)
    assert full == fast
    assert len(ground_static(logistics02)) < len(ground_all(logistics02))


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10_000))
def test_singleton_layers_match_sequential_apply(seed):
    prob = micro_problem(seed)
    acts = ground_all(prob)
    s = prob.init
    for a in acts:
        if a.pre <= s:
            assert apply_layer(s, [a]) == apply(s, a)
            s = apply(s, a)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10_000))
def test_relaxed_reachability_is_a_fixpoint(seed):
    prob = micro_problem(seed)
    chosen = relaxed_reachable(prob)
    reached = set(prob.init).union(*(a.add for a in chosen)) if chosen else set(prob.init)
    for a in ground_all(prob):
        if a.pre <= reached:
            assert a in chosen
