"""Run records, path metrics and summaries."""
from __future__ import annotations

import csv
import statistics
from dataclasses import asdict, dataclass, fields

import numpy as np

LENGTH_W, VELOCITY_W, ACCEL_W = 1.0, 0.1, 0.01


def composite_cost(path) -> float:
    """Length + 0.1 * velocity + 0.01 * acceleration of a waypoint path at unit timestep."""
    if len(path) == 0:
        raise ValueError("path is empty")
    q = np.asarray(path, dtype=float)
    if len(q) == 1:
        return 0.0
    d1 = np.diff(q, axis=0)
    length = float(np.linalg.norm(d1, axis=1).sum())
    velocity = length  # |q[i+1] - q[i]| / dt with dt = 1
    accel = float(np.linalg.norm(np.diff(q, n=2, axis=0), axis=1).sum()) if len(q) > 2 else 0.0
    return LENGTH_W * length + VELOCITY_W * velocity + ACCEL_W * accel


def cv_percent(values) -> float:
    """Population standard deviation over mean, in percent (0 for fewer than two values)."""
    values = list(values)
    if len(values) < 2:
        return 0.0
    mu = statistics.fmean(values)
    if mu == 0:
        return 0.0
    return 100.0 * statistics.pstdev(values) / mu


@dataclass
class RunRecord:
    planner: str
    scenario: str
    repeat: int
    seed: int
    success: bool
    status: str
    path_cost: float  # summed edge cost along the returned path
    composite_cost: float
    planning_time: float
    expansions: int
    re_expansions: int
    merges: int
    connect_attempts: int
    roots: int

    def key(self):
        return (self.scenario, self.planner, self.repeat, self.seed)

    def comparable(self) -> tuple:
        """Everything except wall-clock time."""
        d = asdict(self)
        d.pop("planning_time")
        return tuple(d.values())


RECORD_FIELDS = [f.name for f in fields(RunRecord)]
_INT = {"repeat", "seed", "expansions", "re_expansions", "merges", "connect_attempts", "roots"}
_FLOAT = {"path_cost", "composite_cost", "planning_time"}


def write_records(records, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(RECORD_FIELDS)
        for r in records:
            row = []
            for name in RECORD_FIELDS:
                v = getattr(r, name)
                row.append(repr(v) if isinstance(v, float) else v)
            w.writerow(row)


def read_records(path) -> list:
    out = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            kw = {}
            for name in RECORD_FIELDS:
                v = row[name]
                if name in _INT:
                    kw[name] = int(v)
                elif name in _FLOAT:
                    kw[name] = float(v)
                elif name == "success":
                    kw[name] = v == "True"
                else:
                    kw[name] = v
            out.append(RunRecord(**kw))
    return out


def _mean(xs):
    xs = list(xs)
    return statistics.fmean(xs) if xs else None


def summarize(records) -> dict:
    """Per-planner summary.

    ``cost_cv`` / ``time_cv`` average the per-scenario CV over repeats (or
    perturbations).  ``relative_cost[other]`` is the mean ratio of this
    planner's cost to ``other``'s, over (scenario, repeat) pairs both solved.
    """
    records = sorted(records, key=RunRecord.key)
    by_planner = {}
    for r in records:
        by_planner.setdefault(r.planner, []).append(r)
    solved = {(r.planner, r.scenario, r.repeat, r.seed): r.path_cost for r in records if r.success}
    out = {}
    for planner, rs in sorted(by_planner.items()):
        ok = [r for r in rs if r.success]
        per_scen = {}
        for r in ok:
            per_scen.setdefault(r.scenario, []).append(r)
        rel = {}
        for other in sorted(by_planner):
            if other == planner:
                continue
            ratios = []
            for r in ok:
                c = solved.get((other, r.scenario, r.repeat, r.seed))
                if c is not None and c > 0:
                    ratios.append(r.path_cost / c)
            rel[other] = _mean(ratios)
        out[planner] = {
            "runs": len(rs),
            "success_rate": 100.0 * len(ok) / len(rs),
            "mean_cost": _mean(r.path_cost for r in ok),
            "mean_composite_cost": _mean(r.composite_cost for r in ok),
            "cost_cv": _mean(cv_percent(r.path_cost for r in v) for _, v in sorted(per_scen.items())),
            "time_cv": _mean(cv_percent(r.planning_time for r in v) for _, v in sorted(per_scen.items())),
            "mean_time_success": _mean(r.planning_time for r in ok),
            "mean_time_all": _mean(r.planning_time for r in rs),
            "mean_expansions": _mean(r.expansions for r in rs),
            "relative_cost": rel,
        }
    return out
