"""Command-line entry points.

Subcommands: run-scenario, batch, plan-global, plan-local-step, fuse,
gridmask-svg. Exit codes: 0 success, 1 usage/config error, 2 task failure.
Every output file is written to a temp path and atomically renamed.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import tempfile
import time
from types import SimpleNamespace

from .global_planner import ObstacleSet, optimize, straight_line_init
from .gridmask import GridSpec, ground_scale, render_gridmask_svg
from .local_planner import (
    LocalCostWeights,
    LocalObservation,
    StepThresholds,
    select_direction,
    step_decision,
)
from .mission import CommandError, decompose, execute, parse_command, relation_goal_point
from .plotting import render_run_svg
from .scenario import ScenarioError, load_scenario_file, relation_clearance
from .semantic_map import (
    FusionParams,
    dump_global_map,
    fuse,
    local_map_from_json,
)
from .spline import sample

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_TASK = 2


def _atomic_write(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-agnav-")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _trace_text(trace: list) -> str:
    return "".join(json.dumps(rec, sort_keys=True) + "\n" for rec in trace)


def _run_one(scenario_path: str, seed=None):
    scen = load_scenario_file(scenario_path, seed_override=seed)
    command = parse_command(scen.task, relation_clearance(scen))
    plan = decompose(command, pitch=scen.config.pitch)
    start = time.perf_counter()
    result = execute(plan, scen.world, scen.config)
    wall = time.perf_counter() - start
    summary = result.summary()
    summary["config_hash"] = scen.config_hash
    summary["wall_time"] = wall
    return scen, result, summary


def cmd_run_scenario(args) -> int:
    try:
        scen, result, summary = _run_one(args.file, args.seed)
    except (ScenarioError, CommandError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    _atomic_write(args.trace, _trace_text(result.trace))
    _atomic_write(args.summary, json.dumps(summary, sort_keys=True, indent=1) + "\n")
    plot_path = args.plot or os.path.splitext(args.summary)[0] + ".svg"
    _atomic_write(plot_path, render_run_svg(
        scen.config.arena, scen.world.objects, result.global_paths, result.track))
    print(f"success={summary['success']} collisions={summary['collisions']} "
          f"steps={summary['steps']}")
    return EXIT_OK if summary["success"] else EXIT_TASK


def cmd_batch(args) -> int:
    files = sorted(
        os.path.join(args.scenarios, f)
        for f in os.listdir(args.scenarios)
        if f.endswith(".json")
    )
    if not files:
        print("error: no scenario files found", file=sys.stderr)
        return EXIT_CONFIG
    seeds = [int(s) for s in args.seeds.split(",")] if args.seeds else [None]
    rows = []
    for path in files:
        for seed in seeds:
            try:
                _, result, summary = _run_one(path, seed)
            except (ScenarioError, CommandError) as e:
                print(f"error: {path}: {e}", file=sys.stderr)
                return EXIT_CONFIG
            rows.append((os.path.basename(path), summary["config_hash"][:12],
                         int(summary["success"]), summary["collisions"], summary["steps"]))
    lines = ["scenario,config,success,collisions,steps"]
    for row in rows:
        lines.append(",".join(str(v) for v in row))
    mean_success = sum(r[2] for r in rows) / len(rows)
    mean_coll = sum(r[3] for r in rows) / len(rows)
    lines.append(f"aggregate,,{mean_success},{mean_coll},{sum(r[4] for r in rows)}")
    _atomic_write(args.out, "\n".join(lines) + "\n")
    print(f"runs={len(rows)} success_rate={mean_success} mean_collisions={mean_coll}")
    return EXIT_OK


def cmd_plan_global(args) -> int:
    try:
        scen = load_scenario_file(args.scenario)
        command = parse_command(scen.task, relation_clearance(scen))
    except (ScenarioError, CommandError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    cell = ground_scale(scen.config.camera).cell_m
    by_name = {o.name: o for o in scen.world.objects}

    goal = getattr(command, "goal", None)
    carried = getattr(command, "name", None)
    if goal is None:
        print("error: task has no single movement goal to plan", file=sys.stderr)
        return EXIT_CONFIG
    if goal.kind == "coordinate":
        goal_world = (goal.x, goal.y)
    elif goal.name not in by_name:
        print(f"error: goal object {goal.name!r} not in scenario", file=sys.stderr)
        return EXIT_CONFIG
    elif goal.kind == "object":
        o = by_name[goal.name]
        goal_world = (o.x, o.y)
    else:
        o = by_name[goal.name]
        anchor = SimpleNamespace(x=o.x, y=o.y, orientation=o.yaw)
        goal_world = relation_goal_point(anchor, goal.direction, goal.clearance)

    robot = scen.world.ground_robot
    init, at_goal = straight_line_init(
        (robot.x / cell, robot.y / cell),
        (goal_world[0] / cell, goal_world[1] / cell),
        scen.config.n_controls,
    )
    pairs = [
        ((o.x / cell, o.y / cell), o.radius / cell)
        for o in scen.world.objects
        if o.name not in {carried, getattr(goal, "name", None)}
    ]
    result = optimize(init, scen.config.global_weights, ObstacleSet.from_pairs(pairs),
                      scen.config.optimizer)
    pts = sample(result.path, scen.config.global_weights.sample_count)
    doc = {
        "already_at_goal": at_goal,
        "control_points": result.path.control_points.tolist(),
        "degree": result.path.degree,
        "knots": result.path.knots.tolist(),
        "polyline_world": [[p[0] * cell, p[1] * cell] for p in pts.tolist()],
        "cost": {
            "length": result.breakdown.length,
            "curvature": result.breakdown.curvature,
            "obstacle": result.breakdown.obstacle,
            "total": result.breakdown.total,
        },
        "converged": result.converged,
        "iterations": len(result.cost_history),
    }
    _atomic_write(args.out, json.dumps(doc, sort_keys=True, indent=1) + "\n")
    print(f"cost={result.breakdown.total} converged={result.converged}")
    return EXIT_OK


def cmd_plan_local_step(args) -> int:
    try:
        with open(args.observation, "r", encoding="utf-8") as fh:
            obs_doc = json.load(fh)
        weights = LocalCostWeights()
        if args.weights:
            with open(args.weights, "r", encoding="utf-8") as fh:
                weights = LocalCostWeights(**json.load(fh))
        obs = LocalObservation(
            main=tuple(obs_doc["main"]),
            target=tuple(obs_doc["target"]) if obs_doc.get("target") else None,
            obstacles=tuple(((o[0], o[1]), o[2]) for o in obs_doc.get("obstacles", [])),
            head=tuple(obs_doc["parts"]["head"]),
            tail=tuple(obs_doc["parts"]["tail"]),
            body=tuple(obs_doc["parts"]["body"]),
        )
    except (OSError, KeyError, TypeError, ValueError, json.JSONDecodeError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    choice = select_direction(obs, weights)
    print("theta_deg,align,zero,obstacle,window,total,chosen")
    for cand in choice.table:
        mark = "*" if cand.index == choice.index else ""
        c = cand.cost
        print(f"{math.degrees(cand.theta):.1f},{c.align:.6g},{c.zero:.6g},"
              f"{c.obstacle:.6g},{c.window:.6g},{c.total:.6g},{mark}")
    cmd = step_decision(obs, choice.theta, StepThresholds())
    print(f"command={cmd.kind.value} theta_star_deg={math.degrees(choice.theta):.1f}")
    return EXIT_OK


def cmd_fuse(args) -> int:
    try:
        files = sorted(
            os.path.join(args.maps, f)
            for f in os.listdir(args.maps)
            if f.endswith(".json")
        )
        maps = []
        for path in files:
            with open(path, "r", encoding="utf-8") as fh:
                maps.append(local_map_from_json(json.load(fh)))
        if not maps:
            raise ValueError("no local map files found")
        params = FusionParams(merge_radius=args.merge_radius,
                              conflict_radius=args.conflict_radius)
    except (OSError, KeyError, ValueError, json.JSONDecodeError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    global_map = fuse(maps, params)
    _atomic_write(args.out, dump_global_map(global_map) + "\n")
    print(f"entries={len(global_map.entries)}")
    return EXIT_OK


def cmd_gridmask_svg(args) -> int:
    try:
        spec = GridSpec(args.width, args.height, args.cell)
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    _atomic_write(args.out, render_gridmask_svg(spec))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="agnav", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("run-scenario", help="run one scenario end to end")
    s.add_argument("--file", required=True)
    s.add_argument("--trace", required=True)
    s.add_argument("--summary", required=True)
    s.add_argument("--plot", default=None)
    s.add_argument("--seed", type=int, default=None)
    s.set_defaults(func=cmd_run_scenario)

    s = sub.add_parser("batch", help="run a scenario directory over seeds, emit CSV")
    s.add_argument("--scenarios", required=True)
    s.add_argument("--seeds", default=None, help="comma-separated seed list")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_batch)

    s = sub.add_parser("plan-global", help="plan the aerial path for a scenario's task")
    s.add_argument("--scenario", required=True)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_plan_global)

    s = sub.add_parser("plan-local-step", help="score candidate directions for one observation")
    s.add_argument("--observation", required=True)
    s.add_argument("--weights", default=None)
    s.set_defaults(func=cmd_plan_local_step)

    s = sub.add_parser("fuse", help="fuse a directory of local maps into a global map")
    s.add_argument("--maps", required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--merge-radius", type=float, default=0.1)
    s.add_argument("--conflict-radius", type=float, default=0.5)
    s.set_defaults(func=cmd_fuse)

    s = sub.add_parser("gridmask-svg", help="render the pixel grid overlay as SVG")
    s.add_argument("--width", type=int, required=True)
    s.add_argument("--height", type=int, required=True)
    s.add_argument("--cell", type=float, required=True)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_gridmask_svg)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
