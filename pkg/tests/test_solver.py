import pytest

from guidedplan.advisor import (AdvisorError, HeuristicAdvisor, PassthroughAdvisor,
                                RejectAllAdvisor, ReplayAdvisor)
from guidedplan.solver import (DEPTH_EXCEEDED, EXHAUSTED, SOLVED, TIMEOUT, UNSOLVABLE,
                               SolverConfig, kappa_schedule, run_ablation, solve)
from guidedplan.strips import PlanningProblem, Proposition, validate


def test_kappa_schedule():
    assert kappa_schedule(0.8, 3) == pytest.approx(0.512)
    assert kappa_schedule(0.9, 1) == 0.9


def test_config_validation():
    for bad in (dict(kappa0=1.1), dict(max_restarts=0), dict(max_levels=0)):
        with pytest.raises(ValueError):
            SolverConfig(**bad)
    with pytest.raises(ValueError):
        SolverConfig().for_mode("fast")


def test_vacuum_gp(vacuum):
    r = solve(vacuum, PassthroughAdvisor())
    assert r.outcome == SOLVED
    assert r.plan.to_text() == "(MOVE2BR)\n(VACUUM)\n(MOVE2TR)\n"
    assert len(r.attempts) == 1 and r.metrics.expansion_per_layer[0] == 5


def test_modes_map_to_hooks():
    base = SolverConfig()
    assert (base.for_mode("full").prune, base.for_mode("full").sort) == (True, True)
    assert (base.for_mode("unsorted").prune, base.for_mode("unsorted").sort) == (True, False)
    assert (base.for_mode("unpruned").prune, base.for_mode("unpruned").sort) == (False, True)
    assert (base.for_mode("gp").prune, base.for_mode("gp").sort) == (False, False)


def test_gp_equals_unpruned_with_passthrough(logistics02):
    a = run_ablation(logistics02, HeuristicAdvisor(), None, "gp")
    b = run_ablation(logistics02, PassthroughAdvisor(), None, "unpruned")
    assert a.plan == b.plan and a.metrics == b.metrics


def test_gp_ignores_seed(logistics02):
    runs = [run_ablation(logistics02, None, SolverConfig(seed=s), "gp") for s in (0, 1, 99)]
    assert all(r.metrics == runs[0].metrics and r.plan == runs[0].plan for r in runs)


def test_adversarial_seed_42(vacuum):
    cfg = SolverConfig(kappa0=0.9, max_restarts=50, seed=42, keep_all_on_empty=False)
    r = solve(vacuum, RejectAllAdvisor(), cfg)
    assert r.outcome == SOLVED and validate(vacuum, r.plan)
    assert all(a.outcome != SOLVED for a in r.attempts[:-1])


def test_depth_bound(logistics02):
    r = solve(logistics02, None, SolverConfig(depth_bound=9))
    assert r.outcome == DEPTH_EXCEEDED and r.plan is None


def _unreachable(vacuum):
    d = vacuum.domain
    return PlanningProblem("never", d, (), frozenset({Proposition("dirty")}),
                           frozenset({Proposition("clean"), Proposition("toolroom")}))


def test_leveled_off_unsolvable(vacuum):
    r = solve(_unreachable(vacuum), None)
    assert r.outcome == UNSOLVABLE
    r = solve(_unreachable(vacuum), None, SolverConfig(leveloff=False, max_levels=4))
    assert r.outcome == EXHAUSTED


def test_pruned_leveloff_moves_to_next_attempt(vacuum):
    cfg = SolverConfig(kappa0=1.0, max_restarts=3, keep_all_on_empty=False)
    r = solve(vacuum, RejectAllAdvisor(), cfg)
    assert r.outcome == EXHAUSTED and len(r.attempts) == 3
    assert all(a.pruned > 0 for a in r.attempts)


class Flaky(PassthroughAdvisor):
    passthrough = False

    def __init__(self):
        self.calls = 0

    def prune(self, ctx):
        self.calls += 1
        if self.calls == 1:
            raise AdvisorError("boom")
        return super().prune(ctx)


def test_advisor_error_aborts_only_that_attempt(vacuum):
    r = solve(vacuum, Flaky())
    assert r.outcome == SOLVED
    assert r.attempts[0].outcome == "error" and "boom" in r.attempts[0].error
    assert len(r.errors) == 1


def test_timeout(blocks4):
    r = solve(blocks4, None, SolverConfig(timeout=1e-9))
    assert r.outcome == TIMEOUT


def test_totals_are_sums_of_attempts(vacuum):
    cfg = SolverConfig(kappa0=0.9, max_restarts=50, seed=3, keep_all_on_empty=False)
    r = solve(vacuum, RejectAllAdvisor(), cfg)
    assert r.metrics.dfs_nodes == sum(a.dfs_nodes for a in r.attempts)
    assert r.metrics.expansion_actions == sum(r.metrics.expansion_per_layer)


def test_replay_fixture_plan(logistics02, replay_path, data_dir):
    r = run_ablation(logistics02, ReplayAdvisor.from_file(replay_path),
                     SolverConfig(kappa0=1.0), "full")
    assert r.plan.to_text() == (data_dir / "logistics" / "logistics-02.plan").read_text()
    assert r.metrics.advisor_calls == 20


def test_memoize_flag(blocks4):
    a = solve(blocks4, None, SolverConfig(memoize=False))
    b = solve(blocks4, None, SolverConfig(memoize=True))
    assert a.layers == b.layers
    assert b.metrics.dfs_nodes <= a.metrics.dfs_nodes
