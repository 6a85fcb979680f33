"""Seeded instance generators for the bundled corpus, and corpus lookup helpers.

Each generator returns problem PDDL text for the matching ``data/<domain>/domain.pddl``.
Regenerate the bundled files with ``python -m guidedplan.corpus``.
"""
from __future__ import annotations

import json
import random
from importlib.resources import files
from pathlib import Path
from typing import Callable

DATA = Path(str(files("guidedplan") / "data"))


def _problem(name: str, domain: str, objects, init, goal) -> str:
    lines = [f"(define (problem {name})", f"  (:domain {domain})"]
    if objects:
        lines.append("  (:objects " + " ".join(objects) + ")")
    lines.append("  (:init")
    lines.extend(f"    {f}" for f in init)
    lines[-1] += ")"
    lines.append("  (:goal (and " + " ".join(goal) + "))")
    lines[-1] += ")"
    return "\n".join(lines) + "\n"


def gen_gripper(rng: random.Random, name: str, balls: int = 4, rooms: int = 2) -> str:
    rs = [f"room{i}" for i in range(rooms)]
    bs = [f"ball{i}" for i in range(balls)]
    gs = ["left", "right"]
    init = [f"(room {r})" for r in rs] + [f"(ball {b})" for b in bs]
    init += [f"(gripper {g})" for g in gs] + [f"(free {g})" for g in gs]
    init.append(f"(at-robby {rs[0]})")
    init += [f"(at {b} {rng.choice(rs)})" for b in bs]
    goal = [f"(at {b} {rng.choice(rs)})" for b in bs]
    return _problem(name, "gripper-strips", rs + bs + gs, init, goal)


def gen_miconic(rng: random.Random, name: str, floors: int = 4, passengers: int = 2) -> str:
    fs = [f"f{i}" for i in range(floors)]
    ps = [f"p{i}" for i in range(passengers)]
    init = [f"(floor {f})" for f in fs] + [f"(passenger {p})" for p in ps]
    init += [f"(above {fs[i]} {fs[j]})" for i in range(floors) for j in range(i + 1, floors)]
    for p in ps:
        a, b = rng.sample(fs, 2)
        init += [f"(origin {p} {a})", f"(destin {p} {b})"]
    init.append(f"(lift-at {rng.choice(fs)})")
    return _problem(name, "miconic", fs + ps, init, [f"(served {p})" for p in ps])


def gen_logistics(rng: random.Random, name: str, cities: int = 2, packages: int = 2) -> str:
    objs, init = [], []
    airports = []
    for c in range(cities):
        city, truck = f"c{c}", f"t{c}"
        locs = [f"l{c}0", f"l{c}1"]
        objs += [city, truck] + locs
        init += [f"(CITY {city})", f"(TRUCK {truck})"]
        for l in locs:
            init += [f"(LOCATION {l})", f"(in-city {l} {city})"]
        init += [f"(AIRPORT {locs[0]})", f"(at {truck} {rng.choice(locs)})"]
        airports.append(locs[0])
    objs.append("a0")
    init += ["(AIRPLANE a0)", f"(at a0 {rng.choice(airports)})"]
    locs = [o for o in objs if o.startswith("l")]
    goal = []
    for i in range(packages):
        p = f"p{i}"
        objs.append(p)
        a, b = rng.sample(locs, 2)
        init += [f"(OBJ {p})", f"(at {p} {a})"]
        goal.append(f"(at {p} {b})")
    return _problem(name, "logistics-strips", objs, init, goal)


def gen_movie(rng: random.Random, name: str, per_kind: int = 3) -> str:
    kinds = ["chips", "dip", "pop", "cheese", "crackers"]
    objs = [f"{k}{i}" for k in kinds for i in range(per_kind)]
    init = [f"({o.rstrip('0123456789')} {o})" for o in objs]
    init.append("(counter-at-other-than-two-hours)")
    goal = ["(movie-rewound)", "(counter-at-zero)"] + [f"(have-{k})" for k in kinds]
    return _problem(name, "movie-strips", objs, init, goal)


def _towers(rng: random.Random, blocks: list[str]) -> list[list[str]]:
    order = blocks[:]
    rng.shuffle(order)
    towers: list[list[str]] = []
    for b in order:
        if towers and rng.random() < 0.6:
            rng.choice(towers).append(b)
        else:
            towers.append([b])
    return towers


def gen_blocks(rng: random.Random, name: str, blocks: int = 4) -> str:
    bs = [f"b{i}" for i in range(blocks)]
    init = [f"(block {b})" for b in bs] + ["(handempty)"]
    for t in _towers(rng, bs):
        init.append(f"(ontable {t[0]})")
        init += [f"(on {x} {y})" for y, x in zip(t, t[1:])]
        init.append(f"(clear {t[-1]})")
    goal: list[str] = []
    while not goal or set(goal) <= set(init):
        goal = []
        for t in _towers(rng, bs):
            goal += [f"(on {x} {y})" for y, x in zip(t, t[1:])]
    return _problem(name, "blocks", bs, init, goal)


def gen_satellite(rng: random.Random, name: str, satellites: int = 1, directions: int = 3,
                  images: int = 2) -> str:
    modes = ["thermal", "spectral"]
    ds = [f"dir{i}" for i in range(directions)]
    objs, init = list(modes) + ds, [f"(mode {m})" for m in modes] + [f"(direction {d})" for d in ds]
    for s in range(satellites):
        sat, ins = f"sat{s}", f"ins{s}"
        objs += [sat, ins]
        init += [f"(satellite {sat})", f"(instrument {ins})", f"(on-board {ins} {sat})",
                 f"(power-avail {sat})", f"(pointing {sat} {rng.choice(ds)})",
                 f"(calibration-target {ins} {rng.choice(ds)})"]
        init += [f"(supports {ins} {m})" for m in modes]
    goal = sorted({f"(have-image {rng.choice(ds)} {rng.choice(modes)})" for _ in range(images)})
    return _problem(name, "satellite", objs, init, goal)


def gen_zenotravel(rng: random.Random, name: str, cities: int = 3, people: int = 2) -> str:
    cs = [f"city{i}" for i in range(cities)]
    levels = ["fl0", "fl1", "fl2"]
    ps = [f"person{i}" for i in range(people)]
    init = [f"(city {c})" for c in cs] + [f"(flevel {l})" for l in levels]
    init += [f"(next {a} {b})" for a, b in zip(levels, levels[1:])]
    init += ["(aircraft plane0)", f"(at plane0 {rng.choice(cs)})", "(fuel-level plane0 fl1)"]
    goal = []
    for p in ps:
        a, b = rng.sample(cs, 2)
        init += [f"(person {p})", f"(at {p} {a})"]
        goal.append(f"(at {p} {b})")
    return _problem(name, "zenotravel-strips", cs + levels + ["plane0"] + ps, init, goal)


def gen_driverlog(rng: random.Random, name: str, locations: int = 3, packages: int = 1) -> str:
    ls = [f"s{i}" for i in range(locations)]
    ps = [f"p{i}-{j}" for i, j in zip(range(locations - 1), range(1, locations))]
    init = [f"(location {l})" for l in ls]
    for a, b in zip(ls, ls[1:]):
        init += [f"(link {a} {b})", f"(link {b} {a})"]
    for p, (a, b) in zip(ps, zip(ls, ls[1:])):
        init += [f"(location {p})", f"(path {a} {p})", f"(path {p} {a})",
                 f"(path {b} {p})", f"(path {p} {b})"]
    init += ["(driver driver1)", f"(at driver1 {rng.choice(ls)})",
             "(truck truck1)", f"(at truck1 {rng.choice(ls)})", "(empty truck1)"]
    objs = ls + ps + ["driver1", "truck1"]
    goal = []
    for i in range(packages):
        o = f"pkg{i}"
        a, b = rng.sample(ls, 2)
        objs.append(o)
        init += [f"(obj {o})", f"(at {o} {a})"]
        goal.append(f"(at {o} {b})")
    return _problem(name, "driverlog-strips", objs, init, goal)


def gen_woodworking(rng: random.Random, name: str, parts: int = 2, colours: int = 2) -> str:
    cs = [f"col{i}" for i in range(colours)]
    ps = [f"part{i}" for i in range(parts)]
    init = [f"(colour {c})" for c in cs] + ["(board b0)", "(available b0)", "(saw-free)",
                                            f"(spray-has {cs[0]})"]
    for p in ps:
        init += [f"(part {p})", f"(unused {p})", f"(cut-from {p} b0)"]
    goal = [f"(coloured {p} {rng.choice(cs)})" for p in ps]
    return _problem(name, "woodworking-simple", cs + ps + ["b0"], init, goal)


def gen_openstacks(rng: random.Random, name: str, orders: int = 2, stacks: int = 2) -> str:
    ns = [f"n{i}" for i in range(stacks + 1)]
    os_ = [f"o{i}" for i in range(orders)]
    ps = [f"prod{i}" for i in range(orders)]
    init = [f"(count {n})" for n in ns] + [f"(next-count {a} {b})" for a, b in zip(ns, ns[1:])]
    init.append("(stacks-avail n0)")
    for o in os_:
        init += [f"(order {o})", f"(waiting {o})", f"(includes {o} {rng.choice(ps)})"]
    init += [f"(product {p})" for p in ps]
    return _problem(name, "openstacks-simple", ns + os_ + ps, init, [f"(shipped {o})" for o in os_])


GENERATORS: dict[str, Callable[..., str]] = {
    "gripper": gen_gripper,
    "miconic": gen_miconic,
    "logistics": gen_logistics,
    "movie": gen_movie,
    "blocks": gen_blocks,
    "satellite": gen_satellite,
    "zenotravel": gen_zenotravel,
    "driverlog": gen_driverlog,
    "woodworking": gen_woodworking,
    "openstacks": gen_openstacks,
}

# (problem name, generator kwargs); seeds are derived from the name
PLAN: dict[str, list[tuple[str, dict]]] = {
    "gripper": [("gripper-1", dict(balls=2)), ("gripper-2", dict(balls=4)),
                ("gripper-3", dict(balls=5, rooms=3))],
    "miconic": [("miconic-1", dict(floors=3, passengers=1)), ("miconic-2", dict(floors=4, passengers=2)),
                ("miconic-3", dict(floors=5, passengers=3))],
    "logistics": [("logistics-g1", dict(packages=1)), ("logistics-g2", dict(packages=2))],
    "movie": [("movie-1", dict(per_kind=2)), ("movie-2", dict(per_kind=5))],
    "blocks": [("blocks-3", dict(blocks=3)), ("blocks-5", dict(blocks=5))],
    "satellite": [("satellite-1", dict(directions=3, images=1)),
                  ("satellite-2", dict(directions=4, images=3)),
                  ("satellite-3", dict(satellites=2, directions=4, images=3))],
    "zenotravel": [("zenotravel-1", dict(cities=2, people=1)), ("zenotravel-2", dict(cities=3, people=2)),
                   ("zenotravel-3", dict(cities=3, people=3))],
    "driverlog": [("driverlog-1", dict(locations=2)), ("driverlog-2", dict(locations=3)),
                  ("driverlog-3", dict(locations=3, packages=2))],
    "woodworking": [("woodworking-1", dict(parts=1)), ("woodworking-2", dict(parts=2)),
                    ("woodworking-3", dict(parts=3, colours=3))],
    "openstacks": [("openstacks-1", dict(orders=1, stacks=1)), ("openstacks-2", dict(orders=2, stacks=2)),
                   ("openstacks-3", dict(orders=3, stacks=2))],
}

BLOCKS_4 = """(define (problem blocks-4)
  (:domain blocks)
  (:objects a b c d)
  (:init (block a) (block b) (block c) (block d)
         (ontable a) (on b a) (clear b) (ontable c) (on d c) (clear d) (handempty))
  (:goal (and (on a b) (on c d))))
"""


def generate(domain: str, name: str, **kwargs) -> str:
    rng = random.Random(name)
    return GENERATORS[domain](rng, name, **kwargs)


def domains() -> list[str]:
    return sorted(p.name for p in DATA.iterdir() if (p / "domain.pddl").is_file())


def problems(domain: str) -> list[Path]:
    return sorted(p for p in (DATA / domain).glob("*.pddl") if p.name != "domain.pddl")


def manifest() -> dict:
    path = DATA / "manifest.json"
    return json.loads(path.read_text()) if path.is_file() else {}


def write_bundled() -> None:
    for domain, entries in PLAN.items():
        for name, kwargs in entries:
            (DATA / domain / f"{name}.pddl").write_text(generate(domain, name, **kwargs))
    (DATA / "blocks" / "blocks-4.pddl").write_text(BLOCKS_4)


def write_manifest(max_levels: int = 15) -> dict:
    """Record each bundled problem's optimal layer count (gp mode, unpruned)."""
    from .pddl import load_domain, load_problem
    from .solver import SolverConfig, run_ablation

    out = {}
    for d in domains():
        dom = load_domain(DATA / d / "domain.pddl")
        for p in problems(d):
            res = run_ablation(load_problem(p, dom), None, SolverConfig(max_levels=max_levels), "gp")
            out[f"{d}/{p.stem}"] = {"optimal_layers": res.layers if res.solved else None,
                                    "outcome": res.outcome}
    (DATA / "manifest.json").write_text(json.dumps(out, indent=2, sort_keys=True) + "\n")
    return out


if __name__ == "__main__":
    write_bundled()
    for key, row in write_manifest().items():
        print(key, row["outcome"], row["optimal_layers"])
