import math

import pytest

from dualarm.errors import AlreadyHolding
from dualarm.geometry import Pose, Quaternion, decode_action
from dualarm.simulator import MotionLimits, Simulator
from dualarm.world import (GRIPPER_HEIGHT_OFFSET, empty_scene, place_objects,
                           scene_rng)

DOWN = Quaternion(0.5, -0.5, 0.5, 0.5)


def make_scene(specs):
    s = empty_scene(0, "sim-test")
    place_objects(s, specs, scene_rng("sim-test", 0))
    return s


def cube(oid, x, y, half=0.025, **kw):
    return {"id": oid, "kind": "cube", "half_extents": (half, half, half),
            "x": x, "y": y, **kw}


def grasp(sim, state, tag, oid):
    o = state.object(oid)
    p = o.pose.position
    sim.move_arm_to(state, tag, (p[0], p[1], p[2] + GRIPPER_HEIGHT_OFFSET), DOWN)
    sim.set_gripper(state, tag, 0.0)
    assert state.arms[tag].attached_object == oid
    return o


def test_motion_limits_defaults():
    lim = MotionLimits()
    assert lim.max_translation_per_substep == 0.02
    assert lim.max_rotation_per_substep == 0.1
    assert lim.substeps_per_action == 50


def test_grasp_requires_proximity():
    s = make_scene([cube("a", 0.1, 0.0)])
    sim = Simulator()
    sim.move_arm_to(s, "right", (0.1, 0.0, 1.0), DOWN)
    events = sim.set_gripper(s, "right", 0.0)
    assert s.arms["right"].attached_object is None
    assert any(e.kind == "grasp_miss" for e in events)


def test_grasp_and_release_settles_on_table():
    s = make_scene([cube("a", 0.1, 0.0)])
    sim = Simulator()
    grasp(sim, s, "right", "a")
    sim.move_arm_to(s, "right", (0.2, -0.05, 1.0), DOWN)
    assert s.object("a").pose.position[0] == pytest.approx(0.2)
    sim.set_gripper(s, "right", 1.0)
    assert s.arms["right"].attached_object is None
    assert s.object("a").bottom_z == pytest.approx(s.table_top_z)
    assert ("a", "right") in s.held_history


def test_release_settles_on_support_object():
    s = make_scene([cube("a", 0.1, 0.0), cube("b", -0.1, 0.0)])
    sim = Simulator()
    grasp(sim, s, "right", "a")
    sim.move_arm_to(s, "right", (-0.1, 0.0, 1.0), DOWN)
    sim.set_gripper(s, "right", 1.0)
    assert s.object("a").bottom_z == pytest.approx(s.object("b").top_z)


def test_z_clamp_free_arm_stops_at_table():
    s = make_scene([])
    sim = Simulator()
    events = sim.move_arm_to(s, "left", (0.0, 0.0, 0.5), DOWN)
    z = s.arms["left"].pose.position[2]
    assert z == pytest.approx(s.table_top_z + GRIPPER_HEIGHT_OFFSET)
    assert any(e.kind == "collision_table" for e in events)


def test_z_clamp_holding_keeps_object_above_support():
    s = make_scene([cube("a", 0.1, 0.0), cube("b", -0.1, 0.0)])
    sim = Simulator()
    grasp(sim, s, "right", "a")
    sim.move_arm_to(s, "right", (-0.1, 0.0, 0.7), DOWN)
    gz = s.arms["right"].pose.position[2]
    expected = s.object("b").top_z + 2 * 0.025 + GRIPPER_HEIGHT_OFFSET
    assert gz == pytest.approx(expected)


def test_reach_clipping():
    s = make_scene([])
    sim = Simulator()
    events = sim.move_arm_to(s, "left", (0.6, 0.3, 1.0), DOWN)
    p = s.arms["left"].pose.position
    base = (-0.3495, -0.2523)
    assert math.hypot(p[0] - base[0], p[1] - base[1]) <= 0.65 + 1e-9
    assert any(e.kind == "unreachable_target" for e in events)


def test_handover_transfers_attachment():
    s = make_scene([cube("a", 0.0, 0.0)])
    sim = Simulator()
    grasp(sim, s, "left", "a")
    sim.move_arm_to(s, "left", (0.0, 0.0, 1.05), DOWN)
    p = s.object("a").pose.position
    sim.move_arm_to(s, "right", (p[0], p[1], p[2] + GRIPPER_HEIGHT_OFFSET), DOWN)
    sim.set_gripper(s, "right", 0.0)
    assert s.arms["right"].attached_object == "a"
    assert s.arms["left"].attached_object is None
    assert ("a", "left") in s.held_history and ("a", "right") in s.held_history


def test_cannot_grasp_while_holding():
    s = make_scene([cube("a", 0.1, 0.0), cube("b", 0.2, 0.0)])
    sim = Simulator()
    grasp(sim, s, "right", "a")
    p = s.object("b").pose.position
    sim.move_arm_to(s, "right", (p[0], p[1], p[2] + GRIPPER_HEIGHT_OFFSET), DOWN)
    with pytest.raises(AlreadyHolding):
        sim.try_attach(s, "right")


def test_arm_conflict_event():
    s = make_scene([])
    sim = Simulator()
    sim.move_arm_to(s, "left", (0.0, 0.0, 1.0), DOWN)
    events = sim.move_arm_to(s, "right", (0.05, 0.0, 1.0), DOWN)
    assert any(e.kind == "collision_arm_arm" for e in events)


def test_dual_grasp_same_step():
    s = make_scene([{"id": "bar", "kind": "roller", "half_extents": (0.10, 0.02, 0.025),
                     "x": 0.0, "y": -0.1, "dual_grasp": True}])
    sim = Simulator()
    p = s.object("bar").pose.position
    gz = p[2] + GRIPPER_HEIGHT_OFFSET
    here = [p[0] - 0.08, p[1], gz, 0.5, -0.5, 0.5, 0.5, 1.0,
            p[0] + 0.08, p[1], gz, 0.5, -0.5, 0.5, 0.5, 1.0]
    sim.step_low_level(s, decode_action(here))
    closed = list(here)
    closed[7] = closed[15] = 0.0
    sim.step_low_level(s, decode_action(closed))
    assert s.arms["left"].attached_object == "bar"
    assert s.arms["right"].attached_object == "bar"
    lift = list(closed)
    lift[2] = lift[10] = 1.0
    sim.step_low_level(s, decode_action(lift))
    assert s.object("bar").pose.position[2] > 0.8


def test_low_level_translation_bounded_per_substep():
    s = make_scene([])
    sim = Simulator()
    # a full action spans 50 substeps of at most 0.02 m each
    target = [-0.3495, -0.2523, 1.05, 0.70711, -0.00001, 0.00001, 0.70711, 1.0,
              0.3505, -0.2523, 0.94049, 0.70711, -0.00001, 0.00001, 0.70711, 1.0]
    sim.step_low_level(s, decode_action(target))
    assert s.arms["left"].pose.position[2] == pytest.approx(1.05)


def test_rider_moves_with_carried_support():
    s = make_scene([{"id": "tray", "kind": "box", "half_extents": (0.06, 0.05, 0.03),
                     "x": -0.1, "y": 0.0}])
    place_objects(s, [cube("top", 0.2, 0.0)], scene_rng("r", 0))
    s.object("top").pose = Pose((-0.1, 0.0, s.object("tray").top_z + 0.025),
                                Quaternion.identity())
    sim = Simulator()
    grasp(sim, s, "left", "tray")
    sim.move_arm_to(s, "left", (-0.2, 0.05, 1.0), DOWN)
    tp = s.object("top").pose.position
    assert tp[0] == pytest.approx(-0.2) and tp[1] == pytest.approx(0.05)
