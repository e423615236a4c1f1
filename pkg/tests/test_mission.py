import json
import math

import pytest

from agnav.mission import (
    Assemble,
    AssemblyError,
    Carry,
    CommandError,
    GoalSpec,
    MoveTo,
    PlanError,
    Subtask,
    TaskPlan,
    decompose,
    execute,
    parse_command,
    plan_word_assembly,
    relation_goal_point,
)
from agnav.presets import type_a_scenario, type_b_scenario
from agnav.scenario import load_scenario, relation_clearance
from agnav.semantic_map import Confidence, Direction, GlobalSemanticMap, MapEntry


def entry(name, x, y, orientation=None):
    return MapEntry(name=name, x=x, y=y, support_count=3,
                    confidence=Confidence.CONFIRMED, orientation=orientation)


def global_map(*entries):
    return GlobalSemanticMap(entries=tuple(entries))


# -- grammar -----------------------------------------------------------------

def test_parse_move_to_coordinate():
    cmd = parse_command("move_to (2.0, 1.0)")
    assert isinstance(cmd, MoveTo)
    assert cmd.goal.kind == "coordinate" and (cmd.goal.x, cmd.goal.y) == (2.0, 1.0)


def test_parse_move_to_object():
    cmd = parse_command("move to the U cube")
    assert isinstance(cmd, MoveTo)
    assert cmd.goal == GoalSpec.object("U")


def test_parse_relational_carry():
    cmd = parse_command("move the L cube to the front side of the O cube")
    assert cmd == Carry("L", GoalSpec.relation("O", Direction.FRONT, 0.4))
    cmd = parse_command("carry I to back of U", relation_clearance=0.5)
    assert cmd == Carry("I", GoalSpec.relation("U", Direction.BACK, 0.5))


def test_parse_assemble_forms():
    assert parse_command("assemble LOVE") == Assemble("LOVE", frozenset())
    assert parse_command("assemble OK, fixed {K}") == Assemble("OK", frozenset("K"))
    assert parse_command("assemble OK, do not move K") == Assemble("OK", frozenset("K"))
    assert parse_command("assemble the word BE, but do not move B") == \
        Assemble("BE", frozenset("B"))


def test_parse_rejects_unknown():
    with pytest.raises(CommandError):
        parse_command("juggle the blocks")
    with pytest.raises(CommandError):
        parse_command("assemble OK, do not move Z")


# -- decomposition -----------------------------------------------------------

def test_decompose_carry_expansion():
    plan = decompose(parse_command("carry L to front of O"))
    funcs = [(s.assignee, s.function) for s in plan.subtasks]
    assert funcs == [
        ("drone", "construct_map"),
        ("both", "planning_start"), ("both", "following_start"),
        ("dog", "attach"),
        ("both", "planning_start"), ("both", "following_start"),
        ("dog", "detach"),
    ]
    assert plan.subtasks[1].goal == GoalSpec.object("L")
    assert plan.subtasks[4].goal.kind == "relation"


def test_decompose_move_to():
    plan = decompose(MoveTo(GoalSpec.coordinate(2.0, 1.0)))
    assert [s.function for s in plan.subtasks] == [
        "construct_map", "planning_start", "following_start"]


def test_decompose_assemble_with_map_carries_only_free_letters():
    gm = global_map(entry("O", -0.8, 0.0), entry("K", 1.0, 0.0))
    plan = decompose(Assemble("OK", frozenset("K")), global_map=gm, pitch=0.4)
    attached = [s.object_name for s in plan.subtasks if s.function == "attach"]
    assert attached == ["O"]
    assert plan.pending_assembly is None


def test_decompose_assemble_without_map_defers():
    plan = decompose(Assemble("OK", frozenset("K")))
    assert plan.pending_assembly == Assemble("OK", frozenset("K"))
    assert [s.function for s in plan.subtasks] == ["construct_map"]


def test_plan_requires_construct_map_first():
    bad = TaskPlan((Subtask("dog", "attach", object_name="L"),))
    with pytest.raises(PlanError):
        bad.validate()


def test_plan_requires_paired_threads():
    bad = TaskPlan((
        Subtask("drone", "construct_map"),
        Subtask("both", "planning_start", goal=GoalSpec.object("L")),
        Subtask("dog", "attach", object_name="L"),
    ))
    with pytest.raises(PlanError):
        bad.validate()


def test_fixed_letters_never_carried():
    # L and V already sit exactly two pitches apart (their slot spacing)
    gm = global_map(entry("L", -1.0, 0.0), entry("O", 0.5, 0.6),
                    entry("V", -0.2, 0.0), entry("E", 1.4, -0.3))
    plan = decompose(Assemble("LOVE", frozenset({"L", "V"})), global_map=gm, pitch=0.4)
    carried = {s.object_name for s in plan.subtasks if s.function == "attach"}
    assert carried == {"O", "E"}


# -- word assembly -----------------------------------------------------------

def test_assembly_ok_fixed_k():
    gm = global_map(entry("O", -0.8, 0.3), entry("K", 1.0, 0.0))
    goals = plan_word_assembly("OK", gm, {"K"}, pitch=0.4)
    assert len(goals) == 1
    letter, goal = goals[0]
    assert letter == "O"
    assert (goal.x, goal.y) == (pytest.approx(0.6), pytest.approx(0.0))


def test_assembly_be_reading_order():
    gm = global_map(entry("B", 0.0, 0.0), entry("E", -1.0, 0.5))
    goals = plan_word_assembly("BE", gm, {"B"}, pitch=0.4)
    (letter, goal), = goals
    assert letter == "E"
    assert goal.x == pytest.approx(0.4)  # E lands to the right of B
    assert goal.y == pytest.approx(0.0)


def test_assembly_infeasible_fixed_spacing():
    gm = global_map(entry("L", 0.0, 0.0), entry("O", 1.0, 1.0),
                    entry("V", 10.0, 0.0), entry("E", 2.0, -1.0))
    with pytest.raises(AssemblyError):
        plan_word_assembly("LOVE", gm, {"L", "V"}, pitch=0.4)


def test_assembly_skips_letters_in_place():
    gm = global_map(entry("O", 0.0, 0.0), entry("K", 0.41, 0.01))
    goals = plan_word_assembly("OK", gm, {"O"}, pitch=0.4)
    assert goals == []  # K already within half a pitch of its slot


def test_assembly_missing_letter_rejected():
    gm = global_map(entry("O", 0.0, 0.0))
    with pytest.raises(AssemblyError):
        plan_word_assembly("OK", gm, set(), pitch=0.4)


def test_assembly_duplicate_entry_rejected():
    gm = global_map(entry("O", 0.0, 0.0), entry("O", 2.0, 0.0), entry("K", 1.0, 0.0))
    with pytest.raises(AssemblyError):
        plan_word_assembly("OK", gm, set(), pitch=0.4)


def test_assembly_repeated_word_letter_rejected():
    gm = global_map(entry("B", 0.0, 0.0), entry("E", 1.0, 0.0))
    with pytest.raises(AssemblyError):
        plan_word_assembly("BEE", gm, set(), pitch=0.4)


def test_assembly_unfixed_row_is_collinear_and_pitched():
    gm = global_map(entry("A", 0.3, 0.2), entry("B", -0.9, 0.9), entry("C", 0.8, -0.6))
    goals = plan_word_assembly("ABC", gm, set(), pitch=0.5)
    xs = sorted(g.x for _, g in goals)
    assert all(g.y == goals[0][1].y for _, g in goals)
    diffs = {round(b - a, 12) for a, b in zip(xs, xs[1:])}
    assert diffs <= {0.5, 1.0}  # uniform pitch row (skipped slots leave gaps)


# -- relation geometry --------------------------------------------------------

def test_relation_directions_world_frame():
    e = entry("O", 1.0, 2.0)  # unknown yaw falls back to the world frame
    assert relation_goal_point(e, Direction.FRONT, 0.5) == pytest.approx((1.5, 2.0))
    assert relation_goal_point(e, Direction.BACK, 0.5) == pytest.approx((0.5, 2.0))
    assert relation_goal_point(e, Direction.LEFT, 0.5) == pytest.approx((1.0, 2.5))
    assert relation_goal_point(e, Direction.RIGHT, 0.5) == pytest.approx((1.0, 1.5))


def test_relation_directions_body_frame():
    e = entry("O", 0.0, 0.0, orientation=math.pi / 2)
    assert relation_goal_point(e, Direction.FRONT, 1.0) == pytest.approx((0.0, 1.0))
    assert relation_goal_point(e, Direction.RIGHT, 1.0) == pytest.approx((1.0, 0.0))


# -- execution ---------------------------------------------------------------

def run_scenario_doc(doc):
    scen = load_scenario(doc)
    plan = decompose(parse_command(scen.task, relation_clearance(scen)),
                     pitch=scen.config.pitch)
    return execute(plan, scen.world, scen.config)


def test_noiseless_type_a_end_to_end():
    res = run_scenario_doc(type_a_scenario(0))
    assert res.success
    assert res.collisions == 0
    errors = [p["error_m"] for p in res.placements if not p["approach"]]
    assert errors and max(errors) < 0.1  # half a 0.2 m grid cell


def test_noiseless_type_b_end_to_end():
    res = run_scenario_doc(type_b_scenario(0))
    assert res.success
    assert res.collisions == 0


def test_long_horizon_word_assembly_end_to_end():
    # two free letters around two fixed ones: sequential carries must thread
    # slots between already-placed neighbors without contact
    from agnav.presets import base_scenario, _block

    objects = [
        _block("L", -1.2, 0.8), _block("O", 0.9, -0.9),
        _block("V", -0.4, 0.8), _block("E", 1.1, 0.6),
    ]
    doc = base_scenario("assemble LOVE, do not move L and V", objects)
    doc["execution"]["step_budget"] = 8000
    res = run_scenario_doc(doc)
    assert res.success
    assert res.collisions == 0
    errors = [p["error_m"] for p in res.placements if not p["approach"]]
    assert len(errors) == 2 and max(errors) < 0.1


def test_rollback_completes_after_scripted_drop():
    res = run_scenario_doc(type_a_scenario(0, drop_at_step=130))
    assert res.success
    rollbacks = [r for r in res.trace if r["phase"] == "rollback"]
    attaches = [r for r in res.trace if r["phase"] == "attach" and r.get("attached")]
    assert len(rollbacks) == 1
    assert len(attaches) == 2


def test_execute_rejects_plan_without_map_phase():
    doc = type_a_scenario(0)
    scen = load_scenario(doc)
    bad = TaskPlan((
        Subtask("both", "planning_start", goal=GoalSpec.coordinate(1, 1)),
        Subtask("both", "following_start", goal=GoalSpec.coordinate(1, 1)),
    ))
    with pytest.raises(PlanError):
        execute(bad, scen.world, scen.config)


def test_execute_deterministic_trace():
    doc = type_a_scenario(1, seed=3)
    a = run_scenario_doc(doc)
    b = run_scenario_doc(doc)
    assert json.dumps(a.trace, sort_keys=True) == json.dumps(b.trace, sort_keys=True)
    assert a.summary() == b.summary()


def test_execute_does_not_mutate_input_world():
    doc = type_a_scenario(0)
    scen = load_scenario(doc)
    before = [(o.id, o.x, o.y) for o in scen.world.objects]
    plan = decompose(parse_command(scen.task, relation_clearance(scen)))
    execute(plan, scen.world, scen.config)
    assert [(o.id, o.x, o.y) for o in scen.world.objects] == before


def test_blocked_window_replans_once_then_fails():
    # a window smaller than the lookahead ring bars every candidate, so the
    # executor replans the aerial path once from the current pose and then
    # reports the blocked state as a task failure
    doc = type_a_scenario(0)
    doc["local_weights"]["window_half_extent"] = 3.0
    doc["local_weights"]["lookahead"] = 5.0
    res = run_scenario_doc(doc)
    assert not res.success
    assert "blocked" in res.failure
    replans = [r for r in res.trace if r.get("replanned")]
    assert len(replans) == 1


def test_attach_on_immovable_block_fails_cleanly():
    doc = type_a_scenario(0)
    for o in doc["objects"]:
        if o["name"] == "L":
            o["movable"] = False
    doc["execution"]["attach_budget"] = 40
    res = run_scenario_doc(doc)
    assert not res.success
    assert "attach" in res.failure
