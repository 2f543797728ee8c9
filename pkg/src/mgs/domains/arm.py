"""Planar n-link arm among circular obstacles, searched over a joint lattice.

The lattice spacing is the short step; long primitives move one joint by a
whole number of short steps.  Short primitives are only generated near the
start or the goal so the branching factor stays low in open space.
"""
from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from ..core import BoundsError, Domain, Transition
from ..occupancy import OccupancyGrid

DEG = math.pi / 180.0


def arm_fk(config, link_lengths) -> list:
    """Joint positions of a planar chain based at the origin; the last one is the end effector."""
    x = y = angle = 0.0
    out = []
    for q, length in zip(config, link_lengths):
        angle += q
        x += length * math.cos(angle)
        y += length * math.sin(angle)
        out.append((x, y))
    return out


def arm_jacobian(config, link_lengths) -> np.ndarray:
    pts = arm_fk(config, link_lengths)
    ee = pts[-1]
    base = [(0.0, 0.0)] + pts[:-1]
    jac = np.empty((2, len(config)))
    for j, (bx, by) in enumerate(base):
        jac[0, j] = -(ee[1] - by)
        jac[1, j] = ee[0] - bx
    return jac


def _segment_hits_circle(ax, ay, bx, by, cx, cy, r) -> bool:
    dx, dy = bx - ax, by - ay
    ll = dx * dx + dy * dy
    t = 0.0 if ll == 0 else max(0.0, min(1.0, ((cx - ax) * dx + (cy - ay) * dy) / ll))
    px, py = ax + t * dx - cx, ay + t * dy - cy
    return px * px + py * py <= r * r


def dls_ik(target, seed, link_lengths, joint_limits=None, damping: float = 0.1,
           step_cap: float = 0.2, iterations: int = 200, tol: float = 1e-3):
    """Damped least-squares IK toward a 2D end-effector target.

    Returns ``(config, converged)``.  Joint steps are clipped to
    ``step_cap`` radians per joint and the iterate is clamped to the limits.
    """
    q = np.array(seed, dtype=float)
    target = np.asarray(target, dtype=float)
    lo = hi = None
    if joint_limits is not None:
        lo = np.array([l for l, _ in joint_limits])
        hi = np.array([h for _, h in joint_limits])
    lam2 = damping * damping
    for _ in range(iterations):
        err = target - np.asarray(arm_fk(q, link_lengths)[-1])
        if float(np.linalg.norm(err)) <= tol:
            return tuple(float(v) for v in q), True
        jac = arm_jacobian(q, link_lengths)
        dq = jac.T @ np.linalg.solve(jac @ jac.T + lam2 * np.eye(2), err)
        dq = np.clip(dq, -step_cap, step_cap)
        q = q + dq
        if lo is not None:
            q = np.clip(q, lo, hi)
    err = target - np.asarray(arm_fk(q, link_lengths)[-1])
    return tuple(float(v) for v in q), bool(np.linalg.norm(err) <= tol)


class PlanarArmDomain(Domain):
    """Joint-lattice planning for a planar chain.

    Edge cost is the joint displacement in radians, so the L1 joint distance
    to an exact goal is a consistent heuristic.  For workspace goals the
    admissible heuristic is the end-effector gap divided by the total reach
    (one radian of any joint moves the end effector at most that far).
    """

    def __init__(self, link_lengths, obstacles=(), joint_limits=None, short_step: float = 1 * DEG,
                 long_step: float = 5 * DEG, near_threshold: float = None, margin: float = 0.0,
                 near_workspace: float = None, workspace_cell: float = None):
        self.links = tuple(float(v) for v in link_lengths)
        self.dof = len(self.links)
        self.obstacles = tuple((float(cx), float(cy), float(r)) for cx, cy, r in obstacles)
        self.margin = float(margin)
        if joint_limits is None:
            joint_limits = [(-math.pi, math.pi)] * self.dof
        self.joint_limits = tuple((float(lo), float(hi)) for lo, hi in joint_limits)
        if len(self.joint_limits) != self.dof:
            raise ValueError("need one joint limit per link")
        self.short_step = float(short_step)
        self.long_step = float(long_step)
        ratio = self.long_step / self.short_step
        self.long_mult = int(round(ratio))
        if self.long_mult < 1 or abs(ratio - self.long_mult) > 1e-9:
            raise ValueError("long_step must be a whole multiple of short_step")
        self.resolution = (self.short_step,) * self.dof
        self.bounds = self.joint_limits
        self.near_threshold = 10 * self.short_step if near_threshold is None else float(near_threshold)
        self._near_steps = int(math.floor(self.near_threshold / self.short_step + 1e-9))
        self.reach = sum(self.links)
        self.near_workspace = self.near_threshold * self.reach if near_workspace is None else float(near_workspace)
        self.workspace_cell = self.reach / 20 if workspace_cell is None else float(workspace_cell)
        self._key_lo = tuple(math.ceil(lo / self.short_step - 1e-9) for lo, _ in self.joint_limits)
        self._key_hi = tuple(math.floor(hi / self.short_step + 1e-9) for _, hi in self.joint_limits)
        self._valid = {}
        self._long = {}
        self._ws_grid = None
        self._last_query = None
        self._last_keys = None
        self._succ = {}

    # -- JSON world files ------------------------------------------------

    @classmethod
    def from_json(cls, doc) -> "PlanarArmDomain":
        """Build from a world document with unit-suffixed keys (``*_m``, ``*_deg``)."""
        kw = {}
        if "joint_limits_deg" in doc:
            kw["joint_limits"] = [(lo * DEG, hi * DEG) for lo, hi in doc["joint_limits_deg"]]
        for src, dst in (("short_step_deg", "short_step"), ("long_step_deg", "long_step"),
                         ("near_threshold_deg", "near_threshold")):
            if src in doc:
                kw[dst] = doc[src] * DEG
        for src, dst in (("margin_m", "margin"), ("near_workspace_m", "near_workspace"),
                         ("workspace_cell_m", "workspace_cell")):
            if src in doc:
                kw[dst] = doc[src]
        obstacles = [(o["center_m"][0], o["center_m"][1], o["radius_m"]) for o in doc.get("obstacles", [])]
        return cls(doc["link_lengths_m"], obstacles, **kw)

    def to_json(self) -> dict:
        return {
            "link_lengths_m": list(self.links),
            "joint_limits_deg": [[lo / DEG, hi / DEG] for lo, hi in self.joint_limits],
            "obstacles": [{"center_m": [cx, cy], "radius_m": r} for cx, cy, r in self.obstacles],
            "short_step_deg": self.short_step / DEG,
            "long_step_deg": self.long_step / DEG,
            "near_threshold_deg": self.near_threshold / DEG,
            "margin_m": self.margin,
            "near_workspace_m": self.near_workspace,
            "workspace_cell_m": self.workspace_cell,
        }

    @classmethod
    def load(cls, path) -> "PlanarArmDomain":
        return cls.from_json(json.loads(Path(path).read_text()))

    # -- geometry ----------------------------------------------------------

    def fk(self, config) -> list:
        return arm_fk(config, self.links)

    def workspace_project(self, config) -> tuple:
        return arm_fk(config, self.links)[-1]

    def within_limits(self, config) -> bool:
        return all(lo - 1e-9 <= q <= hi + 1e-9 for q, (lo, hi) in zip(config, self.joint_limits))

    def in_collision(self, config) -> bool:
        ax = ay = 0.0
        for bx, by in arm_fk(config, self.links):
            for cx, cy, r in self.obstacles:
                if _segment_hits_circle(ax, ay, bx, by, cx, cy, r + self.margin):
                    return True
            ax, ay = bx, by
        return False

    def is_valid(self, config) -> bool:
        return len(config) == self.dof and self.within_limits(config) and not self.in_collision(config)

    def _key_valid(self, key) -> bool:
        ok = self._valid.get(key)
        if ok is None:
            ok = all(lo <= k <= hi for k, lo, hi in zip(key, self._key_lo, self._key_hi)) \
                and not self.in_collision(self.config_of(key))
            self._valid[key] = ok
        return ok

    # -- graph ---------------------------------------------------------------

    def _move_valid(self, key, j, steps) -> bool:
        # every short-step lattice state along a single-joint move
        direction = 1 if steps > 0 else -1
        k = list(key)
        for _ in range(abs(steps)):
            k[j] += direction
            if not self._key_valid(tuple(k)):
                return False
        return True

    def _query_keys(self, query):
        # lattice keys of start and exact goal, remembered for the last query seen
        if self._last_query is not query:
            gkey = self.key_of(query.goal.target) if query.goal.is_exact else None
            self._last_keys = (self.key_of(query.start), gkey)
            self._last_query = query
            self._succ = {}
        return self._last_keys

    def _near(self, key, query) -> bool:
        n = self._near_steps
        skey, gkey = self._query_keys(query)
        if max(abs(a - b) for a, b in zip(key, skey)) <= n:
            return True
        goal = query.goal
        if gkey is not None:
            return max(abs(a - b) for a, b in zip(key, gkey)) <= n
        gap = math.dist(self.workspace_project(self.config_of(key)), goal.point) - goal.radius
        return gap <= self.near_workspace

    def successors(self, key, query) -> list:
        self._query_keys(query)
        cached = self._succ.get(key)
        if cached is None:
            cached = self._succ[key] = self._successors(key, query)
        return cached

    def _successors(self, key, query) -> list:
        out = self._long.get(key)
        if out is None:
            out = []
            m = self.long_mult
            for j in range(self.dof):
                for s in (-m, m):
                    if self._move_valid(key, j, s):
                        nb = key[:j] + (key[j] + s,) + key[j + 1:]
                        out.append(Transition(key, nb, self.long_step))
            self._long[key] = out
        if self.long_mult == 1:
            return out
        near_here = self._near(key, query)
        short = []
        for j in range(self.dof):
            for s in (-1, 1):
                nb = key[:j] + (key[j] + s,) + key[j + 1:]
                if self._key_valid(nb) and (near_here or self._near(nb, query)):
                    short.append(Transition(key, nb, self.short_step))
        return out + short if short else out

    def is_goal(self, key, query) -> bool:
        goal = query.goal
        if goal.is_exact:
            return key == self.key_of(goal.target)
        return math.dist(self.workspace_project(self.config_of(key)), goal.point) <= goal.radius

    def heuristic(self, key, query) -> float:
        goal = query.goal
        if goal.is_exact:
            gkey = self._query_keys(query)[1]
            return self.short_step * sum(abs(a - b) for a, b in zip(key, gkey))
        gap = math.dist(self.workspace_project(self.config_of(key)), goal.point) - goal.radius
        return max(0.0, gap) / self.reach

    def focal_heuristic(self, key, query) -> float:
        goal = query.goal
        ee = self.workspace_project(self.config_of(key))
        if goal.is_exact:
            target = self.workspace_project(self.config_of(self.key_of(goal.target)))
            return math.dist(ee, target) + self.heuristic(key, query)
        return max(0.0, math.dist(ee, goal.point) - goal.radius)

    def segment_cost(self, a, b) -> float:
        return sum(abs(x - y) for x, y in zip(a, b))

    # -- root selection hooks ------------------------------------------------

    def workspace_grid(self) -> OccupancyGrid:
        """Workspace raster: obstacles plus everything beyond reach, inflated by one cell."""
        if self._ws_grid is None:
            cs = self.workspace_cell
            n = int(math.ceil(self.reach / cs))
            axis = np.arange(-n, n + 1) * cs
            xs, ys = np.meshgrid(axis, axis, indexing="ij")
            occ = np.hypot(xs, ys) > self.reach
            for cx, cy, r in self.obstacles:
                occ |= np.hypot(xs - cx, ys - cy) <= r + self.margin
            self._ws_grid = OccupancyGrid(occ, cs, origin=(-n * cs, -n * cs), inflation_radius=cs)
        return self._ws_grid

    def goal_workspace_point(self, query):
        goal = query.goal
        return self.workspace_project(goal.target) if goal.is_exact else goal.point

    def attractor_config(self, point, seed, query):
        q, ok = dls_ik(point, seed, self.links, self.joint_limits)
        if not ok:
            return None
        try:
            cfg = self.config_of(self.key_of(q))
        except BoundsError:
            return None
        return cfg if self.is_valid(cfg) else None
