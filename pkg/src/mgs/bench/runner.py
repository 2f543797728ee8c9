"""Planner registry, suite runs and perturbation studies."""
from __future__ import annotations

import json
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from ..core import BoundsError, GoalCondition
from ..focal import plan_single
from ..multigraph import MgsConfig, mgs_plan
from ..roots import compute_roots
from .metrics import RunRecord, composite_cost, summarize, write_records
from .suite import Scenario, Suite, build_domain

log = logging.getLogger(__name__)

PLANNERS = ("mgs", "wastar", "focal", "mgs2")


@dataclass(frozen=True)
class PlannerParams:
    epsilon: float = 1.0
    weight: float = 50.0
    max_subgraphs: int = 10
    timeout: float = 5.0

    @property
    def bound(self) -> float:
        return self.epsilon * self.weight


def run_planner(name, domain, start, goal, params: PlannerParams = PlannerParams(), seed: int = 0):
    """Run one registered planner; returns ``(PlanResult, number of roots, seconds)``.

    ``mgs`` uses (epsilon, weight) as given with attractor roots; ``mgs2``
    is the same search with only the goal as a second root.  The baselines
    spend the whole bound epsilon*weight on one knob: ``wastar`` inflates
    the heuristic, ``focal`` widens FOCAL.
    """
    t0 = time.perf_counter()
    if name == "wastar":
        res = plan_single(domain, start, goal, 1.0, params.bound, params.timeout)
        return res, 0, time.perf_counter() - t0
    if name == "focal":
        res = plan_single(domain, start, goal, params.bound, 1.0, params.timeout)
        return res, 0, time.perf_counter() - t0
    if name == "mgs":
        roots = compute_roots(domain, start, goal, params.max_subgraphs, seed).roots
        m = params.max_subgraphs
    elif name == "mgs2":
        roots = [goal.target] if goal.is_exact else compute_roots(domain, start, goal, 2, seed).roots
        m = 2
    else:
        raise ValueError(f"unknown planner {name!r}; choose from {', '.join(PLANNERS)}")
    left = None
    if params.timeout is not None:
        left = max(params.timeout - (time.perf_counter() - t0), 1e-6)
    cfg = MgsConfig(max_subgraphs=m, epsilon=params.epsilon, weight=params.weight, timeout=left)
    res = mgs_plan(domain, start, goal, roots, cfg)
    return res, len(roots), time.perf_counter() - t0


def make_record(planner, scenario_label, repeat, seed, result, n_roots, elapsed) -> RunRecord:
    return RunRecord(
        planner=planner, scenario=scenario_label, repeat=repeat, seed=seed,
        success=result.success, status=result.status,
        path_cost=float(result.cost),
        composite_cost=composite_cost(result.path) if result.success else float("inf"),
        planning_time=elapsed, expansions=result.expansions, re_expansions=result.re_expansions,
        merges=result.merges, connect_attempts=result.connect_attempts, roots=n_roots,
    )


_DOMAIN_CACHE = {}


def _cached_domain(spec, base_dir):
    key = (str(base_dir), json.dumps(spec, sort_keys=True))
    if key not in _DOMAIN_CACHE:
        _DOMAIN_CACHE[key] = build_domain(spec, base_dir)
    return _DOMAIN_CACHE[key]


def _run_task(task) -> RunRecord:
    spec, base_dir, label, start, goal_doc, planner, repeat, seed, params = task
    domain = _cached_domain(spec, base_dir)
    goal = GoalCondition.from_json(goal_doc)
    res, n_roots, elapsed = run_planner(planner, domain, tuple(start), goal, params, seed)
    return make_record(planner, label, repeat, seed, res, n_roots, elapsed)


def _dispatch(tasks, workers: int) -> list:
    if workers and workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(_run_task, tasks, chunksize=max(1, len(tasks) // (4 * workers))))
    else:
        records = [_run_task(t) for t in tasks]
    return sorted(records, key=RunRecord.key)


def _task(suite: Suite, sc: Scenario, planner, repeat, seed, params):
    return (suite.domain_specs[sc.domain], suite.base_dir, sc.label, list(sc.start), sc.goal.to_json(),
            planner, repeat, seed, params)


def run_suite(suite: Suite, planners=PLANNERS, repeats: int = 5, seed: int = 0,
              params: PlannerParams = PlannerParams(), workers: int = 1):
    """Every scenario x planner x repeat.  Returns ``(sorted records, summary)``."""
    for p in planners:
        if p not in PLANNERS:
            raise ValueError(f"unknown planner {p!r}")
    tasks = [_task(suite, sc, p, r, seed, params)
             for sc in suite.scenarios for p in planners for r in range(repeats)]
    records = _dispatch(tasks, workers)
    return records, summarize(records)


def perturb_query(domain, start, goal: GoalCondition, rng, noise_steps: float = 2.0, retries: int = 100):
    """Start (and goal) moved by uniform noise of ``noise_steps`` lattice steps, snapped and re-validated.

    Returns ``(start, goal)`` or None when no valid sample was found within ``retries``.
    """
    res = np.asarray(domain.resolution, dtype=float)
    if noise_steps == 0:
        return tuple(start), goal

    def jitter(cfg):
        for _ in range(retries):
            q = np.asarray(cfg, dtype=float) + rng.uniform(-1, 1, len(res)) * noise_steps * res
            try:
                snapped = domain.config_of(domain.key_of(tuple(float(v) for v in q)))
            except BoundsError:
                continue
            if domain.is_valid(snapped):
                return snapped
        return None

    new_start = jitter(start)
    if new_start is None:
        return None
    if goal.is_exact:
        target = jitter(goal.target)
        if target is None:
            return None
        return new_start, GoalCondition.exact(target)
    cell = domain.workspace_grid().cell_size
    dim = len(goal.point)
    point = np.asarray(goal.point) + rng.uniform(-1, 1, dim) * noise_steps * cell
    return new_start, GoalCondition.region(point, goal.radius)


def perturbation_study(suite: Suite, planners=PLANNERS, n_perturb: int = 10, noise_steps: float = 2.0,
                       seed: int = 0, params: PlannerParams = PlannerParams(), workers: int = 1):
    """Solve ``n_perturb`` noisy copies of every scenario.

    Records use the base label as scenario and the perturbation index as
    repeat, so the summary's CVs are taken across perturbations.  Returns
    ``(records, summary, warnings)``.
    """
    tasks = []
    warnings = []
    for i, sc in enumerate(suite.scenarios):
        base_seed = sc.perturbation_seed if sc.perturbation_seed is not None else seed
        rng = np.random.default_rng([base_seed, i])
        domain = suite.domain(sc.domain)
        for k in range(n_perturb):
            q = perturb_query(domain, sc.start, sc.goal, rng, noise_steps)
            if q is None:
                msg = f"{sc.label}: perturbation {k} skipped, no valid sample"
                log.warning(msg)
                warnings.append(msg)
                continue
            variant = replace(sc, start=q[0], goal=q[1])
            for p in planners:
                tasks.append(_task(suite, variant, p, k, base_seed, params))
    records = _dispatch(tasks, workers)
    return records, summarize(records), warnings


def write_outputs(out_dir, records, summary, meta=None):
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_records(records, out / "records.csv")
    doc = {"meta": meta or {}, "summary": summary}
    (out / "summary.json").write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    return out / "records.csv", out / "summary.json"
