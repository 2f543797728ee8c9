"""Implicit-graph primitives shared by every planner and domain.

States are identified by a :data:`StateKey` (a tuple of lattice indices) and
carry a continuous :data:`Config`.  Domains generate edges on demand through
:meth:`Domain.successors`; planners own all mutable search state.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Optional, Sequence

import numpy as np

StateKey = tuple  # tuple[int, ...]
Config = tuple  # tuple[float, ...]

INF = float("inf")


class PlanningError(Exception):
    """Base class for planner errors."""


class InvalidQueryError(PlanningError):
    """Start, goal or root configuration is invalid for the domain."""


class BoundsError(PlanningError):
    """A configuration lies outside the domain bounds."""


class ConsistencyError(PlanningError):
    """Internal bookkeeping is broken (bad parent chain, missing merge point...)."""


def round_half_away(x: float) -> int:
    """Round to nearest integer, halves away from zero."""
    if x >= 0:
        return int(math.floor(x + 0.5))
    return -int(math.floor(-x + 0.5))


def key_of(config: Sequence[float], resolution: Sequence[float], bounds=None) -> StateKey:
    """Discretize a configuration: ``coords[i] = round(values[i] / resolution[i])``."""
    if len(config) != len(resolution):
        raise ValueError(f"config has {len(config)} values, resolution has {len(resolution)}")
    if bounds is not None:
        for i, (v, (lo, hi)) in enumerate(zip(config, bounds)):
            if v < lo - 1e-9 or v > hi + 1e-9:
                raise BoundsError(f"value {v} of dimension {i} outside [{lo}, {hi}]")
    out = []
    for v, r in zip(config, resolution):
        if r <= 0:
            raise ValueError("resolutions must be positive")
        out.append(round_half_away(v / r))
    return tuple(out)


class Transition(NamedTuple):
    src: StateKey
    dst: StateKey
    cost: float


@dataclass(frozen=True)
class GoalCondition:
    """Either an exact configuration or a workspace ball ``(point, radius)``."""

    kind: str
    target: Optional[Config] = None
    point: Optional[tuple] = None
    radius: float = 0.0

    def __post_init__(self):
        if self.kind == "config":
            if self.target is None:
                raise ValueError("config goal needs a target")
        elif self.kind == "region":
            if self.point is None or not self.radius > 0:
                raise ValueError("region goal needs a point and a positive radius")
        else:
            raise ValueError(f"unknown goal kind {self.kind!r}")

    @classmethod
    def exact(cls, config) -> "GoalCondition":
        return cls("config", target=tuple(float(v) for v in config))

    @classmethod
    def region(cls, point, radius: float) -> "GoalCondition":
        return cls("region", point=tuple(float(v) for v in point), radius=float(radius))

    @property
    def is_exact(self) -> bool:
        return self.kind == "config"

    def to_json(self) -> dict:
        if self.is_exact:
            return {"config": list(self.target)}
        return {"region": {"point": list(self.point), "radius": self.radius}}

    @classmethod
    def from_json(cls, doc) -> "GoalCondition":
        if "config" in doc:
            return cls.exact(doc["config"])
        if "region" in doc:
            return cls.region(doc["region"]["point"], doc["region"]["radius"])
        raise ValueError(f"goal must contain 'config' or 'region': {doc!r}")


@dataclass(frozen=True)
class Query:
    start: Config
    goal: GoalCondition


class Domain:
    """Implicit-graph contract.

    Subclasses provide successor generation, validity checks, heuristics and
    a Euclidean embedding used for frontier nearest-neighbour queries.  A
    domain is read-only after construction.  Heuristics are unscaled; the
    planner applies its own weight.
    """

    dof: int
    resolution: tuple
    bounds: Optional[tuple] = None

    def key_of(self, config) -> StateKey:
        return key_of(config, self.resolution, self.bounds)

    def config_of(self, key: StateKey) -> Config:
        return tuple(k * r for k, r in zip(key, self.resolution))

    def successors(self, key: StateKey, query: Query) -> list:
        raise NotImplementedError

    def is_valid(self, config) -> bool:
        raise NotImplementedError

    def is_edge_valid(self, a, b, step: float) -> bool:
        """True iff every interpolated config at spacing <= step is valid."""
        for c in self.interpolate(a, b, step)[1:]:
            if not self.is_valid(c):
                return False
        return True

    def interpolate(self, a, b, step: float) -> list:
        return interpolate(a, b, step)

    def heuristic(self, key: StateKey, query: Query) -> float:
        raise NotImplementedError

    def focal_heuristic(self, key: StateKey, query: Query) -> float:
        return self.heuristic(key, query)

    def embed(self, key: StateKey) -> tuple:
        return self.config_of(key)

    def distance(self, a: StateKey, b: StateKey) -> float:
        return math.dist(self.embed(a), self.embed(b))

    def segment_cost(self, a, b) -> float:
        return math.dist(a, b)

    def is_goal(self, key: StateKey, query: Query) -> bool:
        raise NotImplementedError

    def workspace_project(self, config) -> tuple:
        return tuple(config)

    def validate_query(self, query: Query):
        if not self.is_valid(query.start):
            raise InvalidQueryError(f"start {query.start} is invalid")
        if query.goal.is_exact and not self.is_valid(query.goal.target):
            raise InvalidQueryError(f"goal {query.goal.target} is invalid")


def interpolate(a, b, step: float) -> list:
    """Straight-line waypoints from a to b (inclusive) with spacing <= step."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    length = float(np.linalg.norm(b - a))
    n = max(1, int(math.ceil(length / step - 1e-12))) if length > 0 else 1
    ts = np.linspace(0.0, 1.0, n + 1)
    pts = a[None, :] + ts[:, None] * (b - a)[None, :]
    return [tuple(float(v) for v in p) for p in pts]


class SearchNode:
    """Per-subgraph search record for one state."""

    __slots__ = ("key", "config", "g", "h", "h_focal", "f", "parent", "via",
                 "status", "version", "in_focal", "h_connect", "seq")

    NEW, OPEN, CLOSED = "new", "open", "closed"

    def __init__(self, key, config, g=INF, h=0.0, h_focal=0.0, parent=None, via=None):
        self.key = key
        self.config = config
        self.g = g
        self.h = h
        self.h_focal = h_focal
        self.f = INF
        self.parent = parent
        # interior waypoints of the edge parent -> self, None for lattice edges
        self.via = via
        self.status = SearchNode.NEW
        self.version = 0
        self.in_focal = False
        self.h_connect = INF
        self.seq = 0

    def __repr__(self):
        return f"SearchNode({self.key}, g={self.g:.3f}, f={self.f:.3f}, {self.status})"


def reconstruct_path(goal_node: SearchNode, nodes: dict) -> list:
    """Configs from the root (parent None) to ``goal_node`` inclusive."""
    chain = []
    node = goal_node
    seen = set()
    while node is not None:
        if node.key in seen:
            raise ConsistencyError(f"parent cycle through {node.key}")
        seen.add(node.key)
        chain.append(node)
        if node.parent is None:
            break
        parent = nodes.get(node.parent)
        if parent is None:
            raise ConsistencyError(f"broken parent chain at {node.key} -> {node.parent}")
        node = parent
    chain.reverse()
    path = [chain[0].config]
    for node in chain[1:]:
        if node.via:
            path.extend(node.via)
        path.append(node.config)
    return path


def path_keys(goal_node: SearchNode, nodes: dict) -> list:
    keys = []
    node = goal_node
    while node is not None:
        keys.append(node.key)
        node = nodes.get(node.parent) if node.parent is not None else None
    keys.reverse()
    return keys


@dataclass
class PlanResult:
    success: bool
    status: str  # "solved" | "exhausted" | "timeout"
    path: list = field(default_factory=list)
    cost: float = INF
    expansions: int = 0
    re_expansions: int = 0
    planning_time: float = 0.0
    merges: int = 0
    connect_attempts: int = 0
    connections: int = 0
    graph_expansions: dict = field(default_factory=dict)
    expansion_counts: dict = field(default_factory=dict)
    trace: list = field(default_factory=list)
    roots: list = field(default_factory=list)
    focal_checks: int = 0

    def summary(self) -> dict:
        return {
            "success": self.success,
            "status": self.status,
            "cost": self.cost,
            "path_length": len(self.path),
            "expansions": self.expansions,
            "re_expansions": self.re_expansions,
            "planning_time": self.planning_time,
            "merges": self.merges,
            "connect_attempts": self.connect_attempts,
            "connections": self.connections,
            "graph_expansions": {str(k): v for k, v in self.graph_expansions.items()},
            "roots": [list(r) for r in self.roots],
        }
