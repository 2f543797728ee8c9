"""Point robot on an 8-connected (2D) or 26-connected (3D) occupancy grid."""
from __future__ import annotations

import math

import numpy as np

from ..core import BoundsError, Domain, Transition
from ..occupancy import OccupancyGrid


class GridDomain(Domain):
    """Cells are states; configs are cell centres.

    Edge cost is the Euclidean step length (1 cardinal, sqrt(2) diagonal in
    unit cells), so the Euclidean heuristic is admissible and consistent.
    Diagonal moves may cut obstacle corners: the successors of a free cell are
    exactly its free neighbours.
    """

    def __init__(self, grid: OccupancyGrid):
        self.grid = grid
        self.dof = grid.ndim
        self.resolution = (grid.cell_size,) * grid.ndim
        self._occ = grid.occupied
        self._free = ~grid.occupied
        self._offsets = [(d, grid.cell_size * math.sqrt(sum(abs(v) for v in d)))
                         for d in grid.neighbor_offsets()]
        self._cache = {}

    def key_of(self, config):
        cell = self.grid.cell_of(config)
        if not self.grid.in_bounds(cell):
            raise BoundsError(f"{config} is outside the grid")
        return cell

    def config_of(self, key):
        return self.grid.center_of(key)

    def is_valid(self, config) -> bool:
        return self.grid.is_free(self.grid.cell_of(config))

    def successors(self, key, query=None) -> list:
        out = self._cache.get(key)
        if out is not None:
            return out
        dims = self.grid.dims
        free = self._free
        out = []
        for d, cost in self._offsets:
            nb = tuple(k + o for k, o in zip(key, d))
            if all(0 <= c < n for c, n in zip(nb, dims)) and free[nb]:
                out.append(Transition(key, nb, cost))
        self._cache[key] = out
        return out

    def is_edge_valid(self, a, b, step: float) -> bool:
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        length = float(np.linalg.norm(b - a))
        n = max(1, math.ceil(length / step - 1e-12)) if length > 0 else 1
        ts = np.linspace(0.0, 1.0, n + 1)[:, None]
        pts = (a + ts * (b - a) - np.asarray(self.grid.origin)) / self.grid.cell_size
        cells = (np.sign(pts) * np.floor(np.abs(pts) + 0.5)).astype(int)
        dims = np.asarray(self.grid.dims)
        if (cells < 0).any() or (cells >= dims).any():
            return False
        return not self._occ[tuple(cells.T)].any()

    def _goal_distance(self, config, goal) -> float:
        if goal.is_exact:
            return math.dist(config, goal.target)
        return max(0.0, math.dist(config, goal.point) - goal.radius)

    def heuristic(self, key, query) -> float:
        return self._goal_distance(self.grid.center_of(key), query.goal)

    def focal_heuristic(self, key, query) -> float:
        return self.heuristic(key, query)

    def embed(self, key):
        return self.grid.center_of(key)

    def distance(self, a, b) -> float:
        return self.grid.cell_size * math.dist(a, b)

    def is_goal(self, key, query) -> bool:
        goal = query.goal
        if goal.is_exact:
            return key == self.grid.cell_of(goal.target)
        return math.dist(self.grid.center_of(key), goal.point) <= goal.radius

    # -- root selection hooks --------------------------------------------

    def workspace_grid(self) -> OccupancyGrid:
        # the grid is the configuration space of a point robot; no inflation
        return self.grid

    def goal_workspace_point(self, query):
        return query.goal.target if query.goal.is_exact else query.goal.point

    def attractor_config(self, point, seed, query):
        cfg = self.grid.center_of(self.grid.cell_of(point))
        return cfg if self.is_valid(cfg) else None
