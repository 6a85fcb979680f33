import pytest

from guidedplan import corpus
from guidedplan.pddl import load_domain, load_problem
from guidedplan.solver import SolverConfig, run_ablation
from guidedplan.strips import validate

ALL = [(d, p) for d in corpus.domains() for p in corpus.problems(d)]


def test_ten_benchmark_domains_plus_vacuum():
    assert set(corpus.domains()) == set(corpus.GENERATORS) | {"vacuum"}


@pytest.mark.parametrize("domain, path", ALL, ids=[f"{d}/{p.stem}" for d, p in ALL])
def test_bundled_problem_solves_and_validates(domain, path):
    prob = load_problem(path, load_domain(corpus.DATA / domain / "domain.pddl"))
    r = run_ablation(prob, None, SolverConfig(), "gp")
    assert r.solved and validate(prob, r.plan)
    assert corpus.manifest()[f"{domain}/{path.stem}"]["optimal_layers"] == r.layers


def test_generators_are_seeded():
    for domain, entries in corpus.PLAN.items():
        name, kwargs = entries[0]
        assert corpus.generate(domain, name, **kwargs) == corpus.generate(domain, name, **kwargs)
        assert corpus.generate(domain, name, **kwargs) == \
            (corpus.DATA / domain / f"{name}.pddl").read_text()
