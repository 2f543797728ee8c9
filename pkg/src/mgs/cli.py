"""Command line: ``mgs plan | bench | perturb | roots``."""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .bench.metrics import composite_cost
from .bench.overlay import attractor_image, search_image, search_text, write_ppm
from .bench.runner import PLANNERS, PlannerParams, perturbation_study, run_planner, run_suite, write_outputs
from .bench.suite import SuiteError, build_domain, load_suite
from .core import GoalCondition, PlanningError
from .domains import GridDomain
from .roots import compute_roots, overlay_text, save_wavefront


def _add_search_flags(p):
    p.add_argument("--epsilon", type=float, default=1.0, help="focal factor (default 1)")
    p.add_argument("--weight", type=float, default=50.0, help="heuristic weight (default 50)")
    p.add_argument("--max-subgraphs", type=int, default=10, help="m, anchor included (default 10)")
    p.add_argument("--timeout", type=float, default=5.0, help="seconds per query (default 5)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", type=Path, default=None, help="output directory")


def _add_domain_flags(p):
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--map", type=Path, help="grid map file")
    g.add_argument("--arm", type=Path, help="arm world JSON")
    g.add_argument("--se2", type=Path, help="SE(2) domain JSON (map + footprint)")
    p.add_argument("--start", type=float, nargs="+", required=True)
    p.add_argument("--goal", type=float, nargs="+", required=True,
                   help="goal config, or a workspace point with --goal-radius")
    p.add_argument("--goal-radius", type=float, default=None)


def _domain_from_args(args):
    if args.map is not None:
        return build_domain({"type": "grid", "map": str(args.map.resolve())})
    if args.arm is not None:
        return build_domain({"type": "arm", "world": str(args.arm.resolve())})
    doc = json.loads(args.se2.read_text())
    doc["type"] = "se2"
    return build_domain(doc, args.se2.parent)


def _goal_from_args(args):
    if args.goal_radius is not None:
        return GoalCondition.region(args.goal, args.goal_radius)
    return GoalCondition.exact(args.goal)


def _params(args):
    return PlannerParams(args.epsilon, args.weight, args.max_subgraphs, args.timeout)


def cmd_plan(args):
    domain = _domain_from_args(args)
    goal = _goal_from_args(args)
    start = tuple(args.start)
    res, n_roots, elapsed = run_planner(args.planner, domain, start, goal, _params(args), args.seed)
    summary = res.summary()
    summary["planner"] = args.planner
    summary["planning_time"] = elapsed
    if res.success:
        summary["composite_cost"] = composite_cost(res.path)
    print(json.dumps(summary, indent=2))
    if args.out is not None:
        args.out.mkdir(parents=True, exist_ok=True)
        (args.out / "result.json").write_text(json.dumps(summary, indent=2) + "\n")
        (args.out / "path.json").write_text(json.dumps([list(c) for c in res.path]) + "\n")
        if isinstance(domain, GridDomain) and domain.grid.ndim == 2:
            goal_pt = goal.target if goal.is_exact else goal.point
            (args.out / "search.txt").write_text(search_text(domain.grid, res, res.roots, start, goal_pt))
            write_ppm(args.out / "search.ppm", search_image(domain.grid, res, res.roots, start, goal_pt))
    return 0 if res.success else 1


def cmd_bench(args):
    suite = load_suite(args.suite)
    planners = args.planners.split(",")
    records, summary = run_suite(suite, planners, args.repeats, args.seed, _params(args), args.workers)
    meta = {"suite": suite.name, "planners": planners, "repeats": args.repeats, "seed": args.seed,
            "epsilon": args.epsilon, "weight": args.weight, "max_subgraphs": args.max_subgraphs,
            "timeout": args.timeout}
    if args.out is not None:
        write_outputs(args.out, records, summary, meta)
    print(json.dumps(summary, indent=2, sort_keys=True))
    return 0


def cmd_perturb(args):
    suite = load_suite(args.suite)
    planners = args.planners.split(",")
    records, summary, warnings = perturbation_study(suite, planners, args.n_perturb, args.noise, args.seed,
                                                    _params(args), args.workers)
    meta = {"suite": suite.name, "planners": planners, "n_perturb": args.n_perturb, "noise_steps": args.noise,
            "seed": args.seed, "epsilon": args.epsilon, "weight": args.weight,
            "max_subgraphs": args.max_subgraphs, "timeout": args.timeout, "warnings": warnings}
    if args.out is not None:
        write_outputs(args.out, records, summary, meta)
    print(json.dumps(summary, indent=2, sort_keys=True))
    return 0


def cmd_roots(args):
    domain = _domain_from_args(args)
    goal = _goal_from_args(args)
    sel = compute_roots(domain, tuple(args.start), goal, args.max_subgraphs, args.seed)
    doc = {"roots": [list(r) for r in sel.roots],
           "attractors": [{"cell": list(a.cell), "config": list(a.config), "origin": a.origin}
                          for a in sel.attractors],
           "forward": [list(c) for c in sel.forward],
           "start_reachable": sel.start_reachable}
    print(json.dumps(doc, indent=2))
    if args.out is not None:
        args.out.mkdir(parents=True, exist_ok=True)
        (args.out / "roots.json").write_text(json.dumps(doc, indent=2) + "\n")
        grid = domain.workspace_grid()
        if sel.wavefront is not None:
            save_wavefront(sel.wavefront, args.out / "wavefront.json")
            if grid.ndim == 2:
                start_cell = grid.cell_of(domain.workspace_project(tuple(args.start)))
                goal_cell = sel.wavefront.goal
                (args.out / "attractors.txt").write_text(
                    overlay_text(grid, sel.wavefront, sel.wavefront.attractors, start_cell, goal_cell))
                write_ppm(args.out / "attractors.ppm",
                          attractor_image(grid, sel.wavefront.attractors, start_cell, goal_cell))
    return 0


def build_parser():
    parser = argparse.ArgumentParser(prog="mgs", description="Multi-graph search planner and benchmarks")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("plan", help="solve one query")
    _add_domain_flags(p)
    _add_search_flags(p)
    p.add_argument("--planner", choices=PLANNERS, default="mgs")
    p.set_defaults(func=cmd_plan)

    for name, func, helptext in (("bench", cmd_bench, "run a scenario suite"),
                                 ("perturb", cmd_perturb, "perturbation consistency study")):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("suite", type=Path)
        _add_search_flags(p)
        p.add_argument("--planners", default=",".join(PLANNERS))
        p.add_argument("--workers", type=int, default=1)
        if name == "bench":
            p.add_argument("--repeats", type=int, default=5)
        else:
            p.add_argument("--n-perturb", type=int, default=10)
            p.add_argument("--noise", type=float, default=2.0, help="noise in lattice steps (default 2)")
        p.set_defaults(func=func)

    p = sub.add_parser("roots", help="dump attractors and selected roots")
    _add_domain_flags(p)
    _add_search_flags(p)
    p.set_defaults(func=cmd_roots)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except SuiteError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (PlanningError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
