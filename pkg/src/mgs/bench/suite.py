"""Benchmark suites: JSON documents naming domains and planning queries.

::

    {
      "name": "rooms",
      "domains": {
        "rooms": {"type": "grid", "map": "maps/rooms.map"},
        "arm3": {"type": "arm", "world": "worlds/arm3.json"},
        "nav": {"type": "se2", "map": "maps/hall.map", "footprint_m": [[-0.4, -0.3], ...], "theta_bins": 16}
      },
      "scenarios": [
        {"label": "r1", "domain": "rooms", "start": [1, 1], "goal": {"config": [30, 30]}},
        {"label": "a1", "domain": "arm3", "start": [0, 0, 0], "goal": {"region": {"point": [1, 2], "radius": 0.1}}}
      ]
    }

Paths are relative to the suite file.  Configurations are in domain units:
cell-centre coordinates (cell size units) for grids, radians for arm joints,
metres and radians for SE(2) poses.  An arm world may also be given inline
under ``"world"``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from ..core import BoundsError, GoalCondition
from ..domains import GridDomain, PlanarArmDomain, Se2Domain
from ..occupancy import MapFormatError, OccupancyGrid


class SuiteError(ValueError):
    def __init__(self, problems):
        self.problems = list(problems)
        super().__init__("invalid suite:\n  " + "\n  ".join(self.problems))


@dataclass
class Scenario:
    label: str
    domain: str
    start: tuple
    goal: GoalCondition
    perturbation_seed: int = None

    def to_json(self) -> dict:
        doc = {"label": self.label, "domain": self.domain, "start": list(self.start), "goal": self.goal.to_json()}
        if self.perturbation_seed is not None:
            doc["perturbation_seed"] = self.perturbation_seed
        return doc


def build_domain(spec: dict, base_dir="."):
    base = Path(base_dir)
    kind = spec.get("type")
    if kind == "grid":
        return GridDomain(OccupancyGrid.load(base / spec["map"]))
    if kind == "arm":
        world = spec["world"]
        if isinstance(world, str):
            return PlanarArmDomain.load(base / world)
        return PlanarArmDomain.from_json(world)
    if kind == "se2":
        return Se2Domain.from_json(spec, base)
    raise ValueError(f"unknown domain type {kind!r}")


@dataclass
class Suite:
    name: str
    domain_specs: dict
    scenarios: list
    base_dir: str = "."

    def __post_init__(self):
        self._domains = {}

    def domain(self, name):
        if name not in self._domains:
            self._domains[name] = build_domain(self.domain_specs[name], self.base_dir)
        return self._domains[name]

    def to_json(self) -> dict:
        return {"name": self.name, "domains": self.domain_specs,
                "scenarios": [s.to_json() for s in self.scenarios]}

    def validate(self):
        """Raise SuiteError listing every scenario whose domain, start or goal is unusable."""
        problems = []
        for name in self.domain_specs:
            try:
                self.domain(name)
            except (OSError, KeyError, ValueError, MapFormatError) as exc:
                problems.append(f"domain {name!r}: {exc}")
        seen = set()
        for i, sc in enumerate(self.scenarios):
            tag = f"scenario {i} ({sc.label!r})"
            if sc.label in seen:
                problems.append(f"{tag}: duplicate label")
            seen.add(sc.label)
            if sc.domain not in self._domains:
                problems.append(f"{tag}: unknown or broken domain {sc.domain!r}")
                continue
            dom = self._domains[sc.domain]
            try:
                if len(sc.start) != dom.dof or not dom.is_valid(sc.start):
                    problems.append(f"{tag}: start {list(sc.start)} is invalid")
                if sc.goal.is_exact and (len(sc.goal.target) != dom.dof or not dom.is_valid(sc.goal.target)):
                    problems.append(f"{tag}: goal {list(sc.goal.target)} is invalid")
            except BoundsError as exc:
                problems.append(f"{tag}: {exc}")
        if problems:
            raise SuiteError(problems)


def parse_suite(doc: dict, base_dir=".") -> Suite:
    problems = []
    if not isinstance(doc, dict):
        raise SuiteError(["suite must be a JSON object"])
    domains = doc.get("domains")
    if not isinstance(domains, dict) or not domains:
        problems.append("'domains' must be a non-empty object")
        domains = {}
    scenarios = []
    for i, sd in enumerate(doc.get("scenarios") or []):
        try:
            scenarios.append(Scenario(str(sd["label"]), sd["domain"], tuple(float(v) for v in sd["start"]),
                                      GoalCondition.from_json(sd["goal"]), sd.get("perturbation_seed")))
        except (KeyError, TypeError, ValueError) as exc:
            problems.append(f"scenario {i}: {type(exc).__name__}: {exc}")
    if not doc.get("scenarios"):
        problems.append("'scenarios' must be a non-empty list")
    if problems:
        raise SuiteError(problems)
    suite = Suite(doc.get("name", "suite"), domains, scenarios, str(base_dir))
    suite.validate()
    return suite


def load_suite(path) -> Suite:
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise SuiteError([f"{path}: {exc}"]) from None
    return parse_suite(doc, path.parent)
