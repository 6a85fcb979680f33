from pathlib import Path

import pytest

from guidedplan.corpus import DATA
from guidedplan.pddl import load_domain, load_problem


def load(domain: str, problem: str):
    dom = load_domain(DATA / domain / "domain.pddl")
    return load_problem(DATA / domain / f"{problem}.pddl", dom)


@pytest.fixture(scope="session")
def data_dir() -> Path:
    return DATA


@pytest.fixture
def vacuum():
    return load("vacuum", "vacuum1")


@pytest.fixture
def logistics02():
    return load("logistics", "logistics-02")


@pytest.fixture
def blocks4():
    return load("blocks", "blocks-4")


@pytest.fixture(scope="session")
def replay_path() -> Path:
    return DATA / "fixtures" / "logistics-02-replay.json"
