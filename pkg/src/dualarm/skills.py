"""High-level action primitives executed on the simulator.

Eight parameterized skills (action ids 2.2 to 2.9) with schema validation,
default parameters, and the manipulator allocation guard that truncates
kinematically infeasible arm choices before execution.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources

from .errors import SchemaError, UnknownActor
from .geometry import Quaternion, quat_rotate
from .simulator import SimEvent, Simulator
from .world import ARMS, DOWN_QUAT, GRIPPER_HEIGHT_OFFSET, SceneState, reachable


def _load_schemas() -> dict:
    with resources.files("dualarm.data").joinpath("skill_schemas.json").open() as fh:
        return json.load(fh)


SKILL_SCHEMAS: dict = _load_schemas()
NAME_TO_ID = {v["name"]: k for k, v in SKILL_SCHEMAS.items()}

GUARD_TEMPLATE = (
    "Action Failed: target {actor} is too far, {arm} arm can not finish "
    "this '{action}' action! Please use another arm!"
)


@dataclass(frozen=True)
class SkillCall:
    action_id: str
    action_name: str
    parameters: dict


@dataclass
class SkillOutcome:
    status: str  # succeeded | failed_truncated | failed_execution
    feedback: str
    events: list[SimEvent] = field(default_factory=list)
    failure_kind: str | None = None


def _coerce(name: str, spec: dict, value):
    t = spec["type"]
    try:
        if t == "float":
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise ValueError
            return float(value)
        if t == "int":
            if value is None:
                return None
            return int(value)
        if t == "bool":
            if not isinstance(value, bool):
                raise ValueError
            return value
        if t == "str":
            if not isinstance(value, str):
                raise ValueError
            return value
        if t == "arm":
            if not isinstance(value, str) or value.lower() not in ("left", "right"):
                raise ValueError
            return value.lower()
        if t == "pose":
            vals = [float(v) for v in value]
            if len(vals) not in (3, 7):
                raise ValueError
            return vals
        if t == "quat":
            if value is None:
                return None
            vals = [float(v) for v in value]
            if len(vals) != 4:
                raise ValueError
            return vals
        if t == "int_list":
            if value is None:
                return None
            return [int(v) for v in value]
        if t == "dict":
            if value is None:
                return None
            if not isinstance(value, dict):
                raise ValueError
            return value
        return value  # "any"
    except (TypeError, ValueError):
        raise SchemaError(f"parameter '{name}' has invalid value {value!r}")


def validate_call(raw: dict) -> SkillCall:
    """Validate a raw plan entry against the skill schema.

    Applies defaults without overriding explicit values. Raises SchemaError
    with .kind set to 'unknown_action' or 'bad_parameter'.
    """
    if not isinstance(raw, dict):
        err = SchemaError("plan entry is not a mapping")
        err.kind = "bad_parameter"
        raise err
    name = raw.get("action_name")
    action_id = raw.get("action_id")
    if name is None and action_id in SKILL_SCHEMAS:
        name = SKILL_SCHEMAS[action_id]["name"]
    if name not in NAME_TO_ID:
        err = SchemaError(f"unknown action {name!r}")
        err.kind = "unknown_action"
        raise err
    canonical_id = NAME_TO_ID[name]
    if action_id is not None and str(action_id) != canonical_id:
        err = SchemaError(f"action_id {action_id!r} does not match {name}")
        err.kind = "bad_parameter"
        raise err
    schema = SKILL_SCHEMAS[canonical_id]
    raw_params = raw.get("parameters", {})
    if not isinstance(raw_params, dict):
        err = SchemaError("parameters must be a mapping")
        err.kind = "bad_parameter"
        raise err
    params: dict = {}
    try:
        for key, value in raw_params.items():
            if key not in schema["parameters"]:
                raise SchemaError(f"unknown parameter '{key}' for {name}")
            if value is None:
                continue  # explicit null falls back to the default
            params[key] = _coerce(key, schema["parameters"][key], value)
        for key in schema["required"]:
            if key not in params:
                raise SchemaError(f"missing required parameter '{key}' for {name}")
        for key, spec in schema["parameters"].items():
            if key not in params and "default" in spec:
                params[key] = spec["default"]
        if name == "place_actor" and isinstance(params.get("kwargs"), dict):
            for key, value in params["kwargs"].items():
                if key not in schema["parameters"]:
                    raise SchemaError(f"unknown place kwarg '{key}'")
                params[key] = _coerce(key, schema["parameters"][key], value)
            params["kwargs"] = None
        if name == "place_actor" and params["constrain"] not in ("free", "align", "auto"):
            raise SchemaError(f"invalid constrain {params['constrain']!r}")
        if name == "move_by_displacement" and params["move_axis"] not in ("world", "arm"):
            raise SchemaError(f"invalid move_axis {params['move_axis']!r}")
    except SchemaError as err:
        err.kind = "bad_parameter"
        raise
    return SkillCall(canonical_id, name, params)


def allocation_guard(state: SceneState, call: SkillCall) -> str | None:
    """Reachability guard for grasp/place; returns feedback if truncated."""
    if call.action_name not in ("grasp_actor", "place_actor"):
        return None
    arm_tag = call.parameters["arm_tag"]
    actor = call.parameters["actor"]
    if call.action_name == "grasp_actor":
        obj = state.object(actor)
        if obj is None:
            return None
        target = obj.pose.position
        word = "grasp"
    else:
        tp = call.parameters["target_pose"]
        target = (tp[0], tp[1], tp[2])
        word = "place"
    if reachable(ARMS[arm_tag], target):
        return None
    return GUARD_TEMPLATE.format(actor=actor, arm=arm_tag, action=word)


def _fail(feedback: str, kind: str, events=None) -> SkillOutcome:
    return SkillOutcome("failed_execution", f"Action failed: {feedback}", list(events or []), kind)


_CONTACT_OFFSETS = ((1, 0), (-1, 0), (0, 1), (0, -1))


def execute_skill(sim: Simulator, state: SceneState, call: SkillCall) -> SkillOutcome:
    """Run one validated skill call, mutating state in place."""
    p = call.parameters
    arm_tag = p["arm_tag"]
    arm = state.arms[arm_tag]
    events: list[SimEvent] = []
    name = call.action_name

    if name == "grasp_actor":
        obj = state.object(p["actor"])
        if obj is None:
            raise UnknownActor(p["actor"])
        if arm.attached_object is not None:
            return _fail(f"{arm_tag} arm is already holding {arm.attached_object}",
                         "already_holding")
        ox, oy, oz = obj.pose.position
        if p["contact_point_id"]:
            sx, sy = _CONTACT_OFFSETS[int(p["contact_point_id"][0]) % 4]
            ox += sx * obj.half_extents[0]
            oy += sy * obj.half_extents[1]
        grasp_z = oz + GRIPPER_HEIGHT_OFFSET + p["grasp_dis"]
        events += sim.move_arm_to(state, arm_tag, (ox, oy, grasp_z + p["pre_grasp_dis"]), DOWN_QUAT)
        events += sim.move_arm_to(state, arm_tag, (ox, oy, grasp_z))
        events += sim.set_gripper(state, arm_tag, p["gripper_pos"])
        if arm.attached_object != p["actor"]:
            return _fail(f"grasp on {p['actor']} missed", "grasp_miss", events)
        return SkillOutcome("succeeded", "Action succeeded.", events)

    if name == "place_actor":
        if state.object(p["actor"]) is None:
            raise UnknownActor(p["actor"])
        if arm.attached_object != p["actor"]:
            return _fail(f"{arm_tag} arm is not holding {p['actor']}", "place_without_hold")
        tp = p["target_pose"]
        quat = Quaternion(*tp[3:7]) if len(tp) == 7 else DOWN_QUAT
        place_z = tp[2] + GRIPPER_HEIGHT_OFFSET + p["dis"]
        events += sim.move_arm_to(state, arm_tag, (tp[0], tp[1], place_z + p["pre_dis"]), quat)
        events += sim.move_arm_to(state, arm_tag, (tp[0], tp[1], place_z))
        if p["is_open"]:
            events += sim.set_gripper(state, arm_tag, 1.0)
        return SkillOutcome("succeeded", "Action succeeded.", events)

    if name == "move_by_displacement":
        d = (p["x"], p["y"], p["z"])
        if p["move_axis"] == "arm":
            d = quat_rotate(arm.pose.orientation, d)
        cur = arm.pose.position
        quat = Quaternion(*p["quat"]) if p["quat"] else None
        events += sim.move_arm_to(state, arm_tag, (cur[0] + d[0], cur[1] + d[1], cur[2] + d[2]), quat)
        return SkillOutcome("succeeded", "Action succeeded.", events)

    if name == "move_to_pose":
        tp = p["target_pose"]
        quat = Quaternion(*tp[3:7]) if len(tp) == 7 else None
        events += sim.move_arm_to(state, arm_tag, (tp[0], tp[1], tp[2]), quat)
        return SkillOutcome("succeeded", "Action succeeded.", events)

    if name == "close_gripper":
        events += sim.set_gripper(state, arm_tag, p["pos"])
        return SkillOutcome("succeeded", "Action succeeded.", events)

    if name == "open_gripper":
        events += sim.set_gripper(state, arm_tag, p["pos"])
        return SkillOutcome("succeeded", "Action succeeded.", events)

    if name == "back_to_origin":
        base = ARMS[arm_tag].base_origin
        events += sim.move_arm_to(state, arm_tag, base.position, base.orientation)
        return SkillOutcome("succeeded", "Action succeeded.", events)

    if name == "get_arm_pose":
        pos, q = arm.pose.position, arm.pose.orientation
        vals = ", ".join(f"{v:.5f}" for v in (*pos, q.x, q.y, q.z, q.w))
        return SkillOutcome("succeeded", f"Action succeeded. arm pose: [{vals}]", events)

    raise SchemaError(f"unhandled action {name}")  # unreachable after validation
