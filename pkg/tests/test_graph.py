import random

import pytest
from hypothesis import given, settings, strategies as st

from guidedplan.advisor import PassthroughAdvisor, RejectAllAdvisor
from guidedplan.graph import (MutexReason, action_mutex, expand, goal_satisfied, init_graph,
                              leveled_off, literal_mutex)
from guidedplan.metrics import RunMetrics
from guidedplan.strips import GroundAction, Literal, Proposition

from oracles import micro_task


def L(name, positive=True, *args):
    return Literal(Proposition(name, tuple(args)), positive)


def by_name(level):
    return {str(a): a for a in level.actions}


def grown(problem, n, **kw):
    g = init_graph(problem)
    for _ in range(n):
        expand(g, **kw)
    return g


def test_level_zero_vacuum(vacuum):
    g = init_graph(vacuum)
    assert g.last.literals == {L("dirty"), L("toolroom"), L("clean", False), L("bedroom", False)}
    assert g.last.mutex == set()


def test_level_zero_logistics_has_negated_goal(logistics02):
    g = init_graph(logistics02)
    assert L("at", False, "p0", "l11") in g.last.literals
    assert sum(l.positive for l in g.last.literals) == 21


def test_first_expansion_vacuum(vacuum):
    m = RunMetrics()
    g = init_graph(vacuum)
    expand(g, PassthroughAdvisor(), 1.0, random.Random(0), m)
    level = g.action_levels[0]
    assert [str(a) for a in level.domain_actions] == ["(MOVE2BR)"]
    assert len(level.actions) == 5
    assert m.expansion_per_layer == [5]
    new = g.literal_levels[1].literals - g.literal_levels[0].literals
    assert new == {L("bedroom"), L("toolroom", False)}
    assert g.literal_levels[1].is_mutex(L("bedroom"), L("toolroom"))
    assert not g.literal_levels[1].is_mutex(L("dirty"), L("toolroom"))


def test_action_mutex_examples(vacuum):
    g = grown(vacuum, 3)
    a2 = by_name(g.action_levels[1])
    a3 = by_name(g.action_levels[2])
    prev2 = g.literal_levels[1]
    assert action_mutex(a3["(MOVE2BR)"], a3["(MOVE2TR)"], g.literal_levels[2]) \
        is MutexReason.INCONSISTENT_EFFECTS
    assert action_mutex(a2["(VACUUM)"], a2["noop(toolroom)"], prev2) is MutexReason.COMPETING_NEEDS
    assert g.action_levels[1].reasons[frozenset((a2["(VACUUM)"], a2["noop(toolroom)"]))] \
        is MutexReason.COMPETING_NEEDS
    assert action_mutex(a2["noop(dirty)"], a2["(MOVE2BR)"], prev2) is None


def test_literal_mutex_examples(vacuum):
    g = grown(vacuum, 2)
    lv, al = g.literal_levels[2], g.action_levels[1]
    assert literal_mutex(L("clean"), L("clean", False), lv, al)
    assert literal_mutex(L("clean"), L("toolroom"), lv, al)
    assert lv.is_mutex(L("clean"), L("toolroom"))


def test_goal_satisfied_vacuum(vacuum):
    g = init_graph(vacuum)
    seen = []
    for _ in range(3):
        expand(g)
        seen.append(goal_satisfied(g))
    assert seen == [False, False, True]


def test_leveled_off(vacuum):
    g = grown(vacuum, 1)
    assert not leveled_off(g)
    for _ in range(10):
        expand(g)
    assert leveled_off(g)


def test_kappa_zero_matches_passthrough(logistics02):
    ref = grown(logistics02, 4)
    for adv in (RejectAllAdvisor(), PassthroughAdvisor()):
        g = grown(logistics02, 4, advisor=adv, kappa=0.0, keep_all_on_empty=False)
        assert g.dump() == ref.dump()


def test_kappa_one_honours_every_rejection(logistics02):
    g = grown(logistics02, 3, advisor=RejectAllAdvisor(), kappa=1.0, keep_all_on_empty=False)
    assert all(not lvl.domain_actions for lvl in g.action_levels)


def test_empty_keep_set_is_coerced_by_default(logistics02):
    m = RunMetrics()
    g = init_graph(logistics02)
    expand(g, RejectAllAdvisor(), 1.0, random.Random(0), m)
    assert m.empty_keep_coercions == 1
    assert len(g.action_levels[0].domain_actions) == 6


def test_kappa_out_of_range(vacuum):
    with pytest.raises(ValueError):
        expand(init_graph(vacuum), kappa=1.5)


def test_gp_layer_counts_are_monotone(logistics02):
    m = RunMetrics()
    g = init_graph(logistics02)
    for _ in range(10):
        expand(g, metrics=m)
    domain_counts = [len(l.domain_actions) for l in g.action_levels]
    assert domain_counts[0] == 6
    assert domain_counts[2:] == [14, 15, 17, 18, 19, 21, 22, 23]
    assert m.expansion_per_layer == sorted(m.expansion_per_layer)


def test_dump_is_stable(vacuum):
    a, b = grown(vacuum, 3).dump(), grown(vacuum, 3).dump()
    assert a == b
    assert "[literal-level 0]" in a and "mutex (MOVE2BR) | (MOVE2TR) : inconsistent-effects" in a


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 100_000), st.floats(0.0, 1.0), st.integers(0, 1000))
def test_monotone_literals_and_relaxing_mutexes(seed, kappa, rseed):
    task = micro_task(seed)
    g = init_graph(task)
    rng = random.Random(rseed)
    for _ in range(5):
        expand(g, RejectAllAdvisor(), kappa, rng)
    for lo, hi in zip(g.literal_levels, g.literal_levels[1:]):
        assert lo.literals <= hi.literals
        for pr in hi.mutex:
            a, b = tuple(pr)
            if a in lo.literals and b in lo.literals:
                assert lo.is_mutex(a, b)
        for l in hi.literals:
            assert not hi.is_mutex(l, l)
            if l.neg() in hi.literals:
                assert hi.is_mutex(l, l.neg())
    for lvl, prev in zip(g.action_levels, g.literal_levels):
        noops = [a for a in lvl.actions if a.is_noop]
        assert len(noops) == len(prev.literals)
        for a in lvl.actions:
            assert a.pre_literals <= prev.literals


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 100_000))
def test_bulk_mutexes_agree_with_pairwise_rule(seed):
    from itertools import combinations
    g = init_graph(micro_task(seed))
    for _ in range(4):
        expand(g)
    for lvl, prev in zip(g.action_levels, g.literal_levels):
        for a, b in combinations(lvl.actions, 2):
            assert lvl.reasons.get(frozenset((a, b))) == action_mutex(a, b, prev)


def test_noop_clash_is_interference(vacuum):
    g = grown(vacuum, 1)
    lvl = by_name(g.action_levels[0])
    assert action_mutex(lvl["(MOVE2BR)"], lvl["noop(toolroom)"], g.literal_levels[0]) \
        is MutexReason.INTERFERENCE
