"""x-y-theta navigation of a polygonal footprint on a 2D occupancy grid."""
from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np
import shapely
from shapely import affinity
from shapely.geometry import Polygon, box

from ..core import BoundsError, Domain, Transition, round_half_away
from ..occupancy import OccupancyGrid

SWEEP_SAMPLES = 8
AREA_EPS = 1e-12


def wrap_angle(a: float) -> float:
    """Map to [-pi, pi)."""
    return (a + math.pi) % (2 * math.pi) - math.pi


class Se2Domain(Domain):
    """Poses ``(x, y, theta)`` on the cell-centre lattice with ``theta_bins`` headings.

    A pose is valid iff every cell whose square overlaps the footprint (with
    positive area) is free.  Because lattice poses sit on cell centres, the
    covered cell offsets depend only on the heading bin and are precomputed,
    together with the cells swept while turning by one bin.
    """

    def __init__(self, grid: OccupancyGrid, footprint, theta_bins: int = 16):
        if grid.ndim != 2:
            raise ValueError("SE(2) navigation needs a 2D grid")
        self.grid = grid
        self.footprint = Polygon(footprint)
        if not self.footprint.is_valid or self.footprint.area <= 0:
            raise ValueError("footprint must be a simple polygon with positive area")
        self.theta_bins = int(theta_bins)
        self.dtheta = 2 * math.pi / self.theta_bins
        self.dof = 3
        self.resolution = (grid.cell_size, grid.cell_size, self.dtheta)
        self.radius = max(math.hypot(x, y) for x, y in self.footprint.exterior.coords)
        self._free = ~grid.occupied
        self._cover = [self._offsets(self._placed(0.0, 0.0, b * self.dtheta)) for b in range(self.theta_bins)]
        self._sweep = []
        for b in range(self.theta_bins):
            polys = [self._placed(0.0, 0.0, (b + i / SWEEP_SAMPLES) * self.dtheta) for i in range(SWEEP_SAMPLES + 1)]
            self._sweep.append(self._offsets(shapely.union_all(polys)))
        self._valid = {}
        self._cache = {}

    @classmethod
    def from_json(cls, doc, base_dir=".") -> "Se2Domain":
        """``{"map": path, "footprint_m": [[x, y], ...], "theta_bins": 16}``."""
        grid = OccupancyGrid.load(Path(base_dir) / doc["map"])
        return cls(grid, doc["footprint_m"], doc.get("theta_bins", 16))

    @classmethod
    def load(cls, path) -> "Se2Domain":
        path = Path(path)
        return cls.from_json(json.loads(path.read_text()), path.parent)

    def _placed(self, x, y, theta):
        poly = affinity.rotate(self.footprint, theta, origin=(0, 0), use_radians=True)
        return affinity.translate(poly, x, y)

    def _cells_hit(self, poly) -> list:
        """Cells (possibly outside the grid) overlapping ``poly`` with positive area."""
        cs = self.grid.cell_size
        ox, oy = self.grid.origin
        minx, miny, maxx, maxy = poly.bounds
        ix = range(math.floor((minx - ox) / cs + 0.5), math.ceil((maxx - ox) / cs - 0.5) + 1)
        iy = range(math.floor((miny - oy) / cs + 0.5), math.ceil((maxy - oy) / cs - 0.5) + 1)
        cells = [(i, j) for i in ix for j in iy]
        boxes = [box(ox + (i - 0.5) * cs, oy + (j - 0.5) * cs, ox + (i + 0.5) * cs, oy + (j + 0.5) * cs)
                 for i, j in cells]
        areas = shapely.area(shapely.intersection(poly, boxes))
        return [c for c, a in zip(cells, areas) if a > AREA_EPS]

    def _offsets(self, poly) -> np.ndarray:
        # poly is placed at the centre of cell (0, 0) when the origin is zero
        ox, oy = self.grid.origin
        return np.array(self._cells_hit(affinity.translate(poly, ox, oy)), dtype=int)

    def _cells_ok(self, cells) -> bool:
        w, h = self.grid.dims
        if (cells[:, 0] < 0).any() or (cells[:, 1] < 0).any() or (cells[:, 0] >= w).any() or (cells[:, 1] >= h).any():
            return False
        return bool(self._free[cells[:, 0], cells[:, 1]].all())

    # -- lattice -------------------------------------------------------------

    def key_of(self, config):
        x, y, theta = config
        cell = self.grid.cell_of((x, y))
        if not self.grid.in_bounds(cell):
            raise BoundsError(f"{config} is outside the grid")
        return cell + (round_half_away(wrap_angle(theta) / self.dtheta) % self.theta_bins,)

    def config_of(self, key):
        x, y = self.grid.center_of(key[:2])
        return (x, y, wrap_angle(key[2] * self.dtheta))

    def _key_valid(self, key) -> bool:
        ok = self._valid.get(key)
        if ok is None:
            ok = self._cells_ok(self._cover[key[2]] + np.array(key[:2]))
            self._valid[key] = ok
        return ok

    def is_valid(self, config) -> bool:
        try:
            key = self.key_of(config)
        except BoundsError:
            return False
        if self.config_of(key) == tuple(config):
            return self._key_valid(key)
        cells = self._cells_hit(self._placed(*config))
        return bool(cells) and self._cells_ok(np.array(cells, dtype=int))

    def interpolate(self, a, b, step: float) -> list:
        """Straight line in x-y with the heading turning the short way round."""
        dth = wrap_angle(b[2] - a[2])
        span = max(math.dist(a[:2], b[:2]), self.radius * abs(dth))
        n = max(1, math.ceil(span / step - 1e-12)) if span > 0 else 1
        out = []
        for i in range(n + 1):
            t = i / n
            out.append((a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1]), wrap_angle(a[2] + t * dth)))
        out[-1] = tuple(b)
        return out

    def successors(self, key, query=None) -> list:
        out = self._cache.get(key)
        if out is not None:
            return out
        out = []
        cs = self.grid.cell_size
        ix, iy, it = key
        for dx, dy in ((-1, 0), (1, 0), (0, -1), (0, 1)):
            nb = (ix + dx, iy + dy, it)
            if self._key_valid(nb):
                out.append(Transition(key, nb, cs))
        turn = self.radius * self.dtheta
        for d in (-1, 1):
            nb = (ix, iy, (it + d) % self.theta_bins)
            lo = it if d > 0 else nb[2]
            if self._key_valid(nb) and self._cells_ok(self._sweep[lo] + np.array(key[:2])):
                out.append(Transition(key, nb, turn))
        self._cache[key] = out
        return out

    def _angle_gap(self, a, b) -> float:
        return abs(wrap_angle(a - b))

    def heuristic(self, key, query) -> float:
        x, y, th = self.config_of(key)
        goal = query.goal
        if goal.is_exact:
            gx, gy, gth = self.config_of(self.key_of(goal.target))
            return abs(x - gx) + abs(y - gy) + self.radius * self._angle_gap(th, gth)
        return max(0.0, math.dist((x, y), goal.point[:2]) - goal.radius)

    def focal_heuristic(self, key, query) -> float:
        x, y, th = self.config_of(key)
        goal = query.goal
        if goal.is_exact:
            gx, gy, gth = self.config_of(self.key_of(goal.target))
            return math.dist((x, y), (gx, gy)) + self.radius * self._angle_gap(th, gth)
        return max(0.0, math.dist((x, y), goal.point[:2]) - goal.radius)

    def segment_cost(self, a, b) -> float:
        return abs(a[0] - b[0]) + abs(a[1] - b[1]) + self.radius * self._angle_gap(a[2], b[2])

    def embed(self, key):
        x, y, th = self.config_of(key)
        return (x, y, self.radius * math.cos(th), self.radius * math.sin(th))

    def is_goal(self, key, query) -> bool:
        goal = query.goal
        if goal.is_exact:
            return key == self.key_of(goal.target)
        return math.dist(self.config_of(key)[:2], goal.point[:2]) <= goal.radius

    def workspace_project(self, config) -> tuple:
        return tuple(config[:2])

    # -- root selection hooks --------------------------------------------

    def workspace_grid(self) -> OccupancyGrid:
        return self.grid.with_inflation(self.grid.cell_size)

    def goal_workspace_point(self, query):
        goal = query.goal
        return tuple(goal.target[:2]) if goal.is_exact else tuple(goal.point[:2])

    def attractor_config(self, point, seed, query):
        """Cell centre of ``point`` with the heading of the nearer of start and goal."""
        x, y = self.grid.center_of(self.grid.cell_of(point))
        start = query.start
        goal_xy = self.goal_workspace_point(query)
        if query.goal.is_exact and math.dist((x, y), goal_xy) < math.dist((x, y), start[:2]):
            theta = query.goal.target[2]
        else:
            theta = start[2]
        cfg = self.config_of(self.key_of((x, y, theta)))
        return cfg if self.is_valid(cfg) else None
