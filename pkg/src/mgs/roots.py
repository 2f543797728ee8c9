"""Workspace-aware root selection.

A backward breadth-first wavefront from the goal labels every reachable
workspace cell with an attractor: a cell that greedy descent on the
Euclidean potential is guaranteed to reach.  New attractors appear where
the wavefront bends around obstacles.  Attractors met while following the
BFS policy from the start come first; the rest are ordered by wavefront
cost.  They are mapped to robot configurations and, when there are more
than the root budget allows, clustered with k-means.
"""
from __future__ import annotations

import itertools
import json
import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .core import InvalidQueryError, Query
from .occupancy import OccupancyGrid

KMEANS_ITERS = 50


def euclidean(a, b) -> float:
    return math.dist(a, b)


@dataclass
class Wavefront:
    goal: tuple
    cost: np.ndarray  # BFS layer per cell, inf where unreached
    attractor: dict  # cell -> attractor cell
    parent: dict  # cell -> next cell toward the goal (None at the goal)
    attractors: list  # in discovery order, goal first

    def to_json(self) -> dict:
        cost = np.where(np.isfinite(self.cost), self.cost, -1).astype(int)
        return {
            "goal": list(self.goal),
            "dims": list(self.cost.shape),
            "cost": cost.tolist(),
            "attractors": [list(a) for a in self.attractors],
            "labels": [[list(c), list(a)] for c, a in sorted(self.attractor.items())],
        }


@dataclass
class Attractor:
    cell: tuple
    config: tuple
    origin: str  # "forward" or "backward"
    point: tuple  # workspace coordinates of the cell centre


@dataclass
class RootSelection:
    roots: list
    attractors: list = field(default_factory=list)
    wavefront: Wavefront = None
    forward: list = field(default_factory=list)
    start_reachable: bool = True


def _free_neighbors(free, cell, offsets):
    dims = free.shape
    out = []
    for d in offsets:
        nb = tuple(c + o for c, o in zip(cell, d))
        if all(0 <= v < n for v, n in zip(nb, dims)) and free[nb]:
            out.append(nb)
    return out


def greedy_predecessor(free, cell, target, potential=euclidean, offsets=None):
    """Free neighbour strictly lowering the potential the most (ties: smallest cell), else None."""
    if offsets is None:
        offsets = _offsets(free.ndim)
    here = potential(cell, target)
    best = None
    best_v = here
    for nb in sorted(_free_neighbors(free, cell, offsets)):
        v = potential(nb, target)
        if v < best_v:
            best, best_v = nb, v
    return best


def _offsets(ndim):
    return [d for d in itertools.product((-1, 0, 1), repeat=ndim) if any(d)]


def greedy_trace(grid, start_cell, target_cell, potential=euclidean, inflated=True):
    """Cells visited by greedy descent from ``start_cell``; None if it stalls before the target."""
    free = ~(grid.inflated if inflated else grid.occupied)
    offsets = _offsets(grid.ndim)
    start_cell, target_cell = tuple(start_cell), tuple(target_cell)
    path = [start_cell]
    cell = start_cell
    while cell != target_cell:
        cell = greedy_predecessor(free, cell, target_cell, potential, offsets)
        if cell is None:
            return None
        path.append(cell)
    return path


def _reaches(free, cell, a, label, potential, offsets) -> bool:
    """Greedy descent from ``cell`` toward ``a`` hits ``a`` or a cell already labelled ``a``."""
    while True:
        cell = greedy_predecessor(free, cell, a, potential, offsets)
        if cell is None:
            return False
        if cell == a or label.get(cell) == a:
            return True


def backward_bfs_attractors(grid: OccupancyGrid, goal_cell, potential=euclidean, inflated=True) -> Wavefront:
    """Uniform-cost wavefront from the goal with attractor labelling.

    A newly reached cell takes a label ``a`` (tried in order: the label of
    its BFS parent, then the labels of its other reached neighbours) when
    greedy descent toward ``a`` runs into ``a`` or into a cell already
    labelled ``a``; by induction descent from every labelled cell ends at
    its label.  If no label qualifies, the BFS parent becomes a new
    attractor.
    """
    goal_cell = tuple(int(v) for v in goal_cell)
    free = ~(grid.inflated if inflated else grid.occupied)
    if not grid.in_bounds(goal_cell) or not free[goal_cell]:
        raise InvalidQueryError(f"goal cell {goal_cell} is not free")
    offsets = _offsets(grid.ndim)
    cost = np.full(grid.dims, np.inf)
    cost[goal_cell] = 0.0
    label = {goal_cell: goal_cell}
    parent = {goal_cell: None}
    attractors = [goal_cell]
    is_attractor = {goal_cell}
    queue = deque([goal_cell])
    while queue:
        w = queue.popleft()
        gw = cost[w]
        for nb in _free_neighbors(free, w, offsets):
            if nb in label:
                continue
            cost[nb] = gw + 1
            parent[nb] = w
            candidates = [label[w]]
            for other in sorted(_free_neighbors(free, nb, offsets)):
                a = label.get(other)
                if a is not None and a not in candidates:
                    candidates.append(a)
            chosen = None
            for a in candidates:
                if _reaches(free, nb, a, label, potential, offsets):
                    chosen = a
                    break
            if chosen is None:
                chosen = w
                if w not in is_attractor:
                    is_attractor.add(w)
                    attractors.append(w)
            label[nb] = chosen
            queue.append(nb)
    return Wavefront(goal_cell, cost, label, parent, attractors)


def forward_attractors(wave: Wavefront, start_cell):
    """Attractor labels met while following the BFS policy from ``start_cell`` to the goal.

    Returns ``(attractors in first-encounter order, reachable)``.
    """
    cell = tuple(start_cell)
    if cell not in wave.parent:
        return [], False
    out = []
    seen = set()
    while cell is not None:
        a = wave.attractor[cell]
        if a not in seen:
            seen.add(a)
            out.append(a)
        cell = wave.parent[cell]
    return out, True


def kmeans(points, k: int, seed: int = 0, iterations: int = KMEANS_ITERS):
    """Lloyd iterations from a farthest-point initialisation; returns (centroids, labels)."""
    pts = np.asarray(points, dtype=float)
    n = len(pts)
    k = min(k, n)
    rng = np.random.default_rng(seed)
    chosen = [int(rng.integers(n))]
    d = np.linalg.norm(pts - pts[chosen[0]], axis=1)
    while len(chosen) < k:
        i = int(np.argmax(d))
        chosen.append(i)
        d = np.minimum(d, np.linalg.norm(pts - pts[i], axis=1))
    cent = pts[chosen].copy()
    labels = None
    for _ in range(iterations):
        dist = np.linalg.norm(pts[:, None, :] - cent[None, :, :], axis=2)
        new = dist.argmin(axis=1)
        if labels is not None and np.array_equal(new, labels):
            break
        labels = new
        for j in range(k):
            members = pts[labels == j]
            if len(members):
                cent[j] = members.mean(axis=0)
    return cent, labels


def select_roots(attractors, budget: int, goal_config=None, seed: int = 0) -> list:
    """Up to ``budget`` root configs: the goal first, then attractors (clustered if too many)."""
    if budget <= 0:
        return []
    roots = []
    if goal_config is not None:
        roots.append(tuple(goal_config))
    pool = [a for a in attractors if tuple(a.config) not in roots]
    left = budget - len(roots)
    if left <= 0:
        return roots
    if len(pool) <= left:
        return roots + [tuple(a.config) for a in pool]
    pts = np.array([a.point for a in pool], dtype=float)
    cent, labels = kmeans(pts, left, seed)
    for j, c in enumerate(cent):
        members = np.flatnonzero(labels == j)
        if not len(members):
            continue
        d = np.linalg.norm(pts[members] - c, axis=1)
        rep = tuple(pool[int(members[int(np.argmin(d))])].config)
        if rep not in roots:
            roots.append(rep)
    return roots


def map_attractor_to_config(domain, cell, seed, query, grid=None):
    """Robot configuration for a workspace cell, or None when the mapping fails."""
    grid = grid if grid is not None else domain.workspace_grid()
    return domain.attractor_config(grid.center_of(cell), seed, query)


def compute_roots(domain, start, goal, max_subgraphs: int = 10, seed: int = 0) -> RootSelection:
    """Attractor-derived roots for a query; at most ``max_subgraphs - 1`` of them."""
    query = Query(tuple(start), goal)
    budget = max_subgraphs - 1
    goal_config = tuple(goal.target) if goal.is_exact else None
    grid = domain.workspace_grid()
    goal_cell = grid.cell_of(domain.goal_workspace_point(query))
    wave = None
    for inflated in (True, False):
        if grid.is_free(goal_cell, inflated=inflated):
            wave = backward_bfs_attractors(grid, goal_cell, inflated=inflated)
            break
    if wave is None:
        return RootSelection(select_roots([], budget, goal_config, seed))

    start_cell = grid.cell_of(domain.workspace_project(tuple(start)))
    forward, reachable = forward_attractors(wave, start_cell)
    order = list(forward)
    rest = sorted((a for a in wave.attractors if a not in set(forward)), key=lambda c: (wave.cost[c], c))
    order += rest
    fwd = set(forward)
    mapped = []
    prev = tuple(start)
    for cell in order:
        if goal_config is not None and cell == wave.goal:
            continue
        cfg = map_attractor_to_config(domain, cell, prev, query, grid)
        if cfg is None:
            continue
        prev = cfg
        mapped.append(Attractor(cell, cfg, "forward" if cell in fwd else "backward", grid.center_of(cell)))
    roots = select_roots(mapped, budget, goal_config, seed)
    return RootSelection(roots, mapped, wave, forward, reachable)


def overlay_text(grid: OccupancyGrid, wave: Wavefront = None, attractors=(), start=None, goal=None,
                 marks=None) -> str:
    """2D character overlay: ``#`` occupied, ``+`` inflation, ``A`` attractor, ``S``/``G`` endpoints.

    ``marks`` maps extra cells to characters (drawn under A/S/G).
    """
    if grid.ndim != 2:
        raise ValueError("text overlays are 2D only")
    w, h = grid.dims
    canvas = [["#" if grid.occupied[x, y] else ("+" if grid.inflated[x, y] else ".") for x in range(w)]
              for y in range(h)]
    if wave is not None:
        for x in range(w):
            for y in range(h):
                if canvas[y][x] == "." and not np.isfinite(wave.cost[x, y]):
                    canvas[y][x] = " "
    for cell, ch in (marks or {}).items():
        canvas[cell[1]][cell[0]] = ch
    for cell in attractors:
        canvas[cell[1]][cell[0]] = "A"
    if start is not None:
        canvas[start[1]][start[0]] = "S"
    if goal is not None:
        canvas[goal[1]][goal[0]] = "G"
    return "\n".join("".join(row) for row in canvas) + "\n"


def save_wavefront(wave: Wavefront, path):
    with open(path, "w") as fh:
        json.dump(wave.to_json(), fh)
