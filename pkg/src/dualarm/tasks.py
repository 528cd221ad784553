"""Task registry: scene builders, success predicates, per-task context blocks.

The registry definition (ids, tiers, instructions, chunk limits, predicate
atoms) lives in a JSON data file so that tolerances and wording can be edited
without touching code. Scene builders and the predicate atom interpreter live
here.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from importlib import resources
from typing import Callable

from .errors import RegistryError, UnknownTask
from .world import (
    CUBE_HALF,
    DOWN_QUAT,
    GRIPPER_HEIGHT_OFFSET,
    TABLE_TOP_Z,
    TIER_ONE_CONFIGS,
    ObjectInstance,
    SceneState,
    empty_scene,
    ground_truth_arm,
    place_objects,
    scene_rng,
)

TIERS = ("spatial", "high_level", "low_level")
COORDINATIONS = (
    "independent_parallel",
    "sequential_collaborative",
    "synchronous_collaborative",
    "single_arm",
)

CANONICAL_TASK_IDS = (
    "spatial_sparse",
    "spatial_dense",
    "spatial_cluttered",
    "place_cans_plasticbox",
    "blocks_cross_shape",
    "blocks_ranking_size",
    "blocks_ranking_rgb",
    "stack_blocks_three",
    "stack_bowls_three",
    "handover_mic",
    "handover_block",
    "hanging_mug",
    "place_burger_fries",
    "place_object_basket",
    "place_bread_skillet",
    "blocks_tower",
    "put_bottles_dustbin",
    "place_object_scale",
    "place_burger_fries_low",
    "place_bread_skillet_low",
    "grab_roller",
    "stack_blocks_two",
)


@dataclass(frozen=True)
class TaskSpec:
    id: str
    code: str
    tier: str
    coordination: str
    instruction: str
    max_chunk_size: int
    max_plan_rounds: int
    predicate: tuple
    build_scene: Callable[[int], SceneState]


# ---------------------------------------------------------------------------
# scene builders

def _scene(task_id: str, seed: int) -> SceneState:
    s = empty_scene(seed, task_id)
    return s


def _cube(oid, color, **kw):
    spec = {"id": oid, "kind": "cube", "half_extents": (CUBE_HALF, CUBE_HALF, CUBE_HALF), "color": color}
    spec.update(kw)
    return spec


def _build_spatial(setting: str):
    cfg = TIER_ONE_CONFIGS[setting]
    palette = ("red", "green", "blue", "yellow", "black")

    def build(seed: int) -> SceneState:
        s = _scene(f"spatial_{setting}", seed)
        rng = scene_rng(s.task_id, seed)
        specs = []
        for i in range(cfg.cube_count):
            color = palette[i]
            specs.append(_cube(f"{color}_cube", color, x_range=cfg.x_range, y_range=cfg.y_range))
        for i in range(cfg.distractor_count):
            specs.append({
                "id": f"distractor{i + 1}", "kind": "distractor",
                "half_extents": (0.02, 0.02, 0.02), "color": "gray",
                "graspable": False, "x_range": cfg.x_range, "y_range": cfg.y_range,
            })
        place_objects(s, specs, rng)
        s.targets = [f"{palette[i]}_cube" for i in range(cfg.cube_count)]
        return s

    return build


# back strip for initial spawns, clear of the target area near the front
_STRIP_X = (-0.28, 0.28)
_STRIP_Y = (0.02, 0.10)


def _build_place_cans_plasticbox(seed: int) -> SceneState:
    s = _scene("place_cans_plasticbox", seed)
    rng = scene_rng(s.task_id, seed)
    place_objects(s, [
        {"id": "plasticbox", "kind": "container", "half_extents": (0.08, 0.06, 0.02),
         "color": "white", "graspable": False, "x": 0.0, "y": -0.02},
        {"id": "can_left", "kind": "bottle", "half_extents": (0.02, 0.02, 0.04),
         "color": "green", "x_range": (-0.28, -0.10), "y_range": (-0.20, 0.05)},
        {"id": "can_right", "kind": "bottle", "half_extents": (0.02, 0.02, 0.04),
         "color": "red", "x_range": (0.10, 0.28), "y_range": (-0.20, 0.05)},
    ], rng)
    box = s.object("plasticbox").pose.position
    s.named_points["target_can_left"] = (box[0] - 0.03, box[1])
    s.named_points["target_can_right"] = (box[0] + 0.03, box[1])
    s.targets = ["can_left", "can_right"]
    return s


def _build_blocks_cross_shape(seed: int) -> SceneState:
    s = _scene("blocks_cross_shape", seed)
    rng = scene_rng(s.task_id, seed)
    colors = ["red", "black", "blue", "green", "yellow"]
    specs = [_cube(f"{c}_block", c, x_range=_STRIP_X, y_range=_STRIP_Y) for c in colors]
    place_objects(s, specs, rng)
    cx, cy = 0.0, -0.10
    s.named_points.update({
        "target_red_block": (cx - 0.07, cy),
        "target_black_block": (cx, cy),
        "target_blue_block": (cx + 0.07, cy),
        "target_green_block": (cx, cy + 0.07),
        "target_yellow_block": (cx, cy - 0.07),
    })
    s.targets = [f"{c}_block" for c in colors]
    return s


def _build_blocks_ranking_size(seed: int) -> SceneState:
    s = _scene("blocks_ranking_size", seed)
    rng = scene_rng(s.task_id, seed)
    colors = ["red", "green", "blue"]
    rng.shuffle(colors)
    halves = (0.03, 0.025, 0.02)
    specs = []
    for i, h in enumerate(halves):
        specs.append({
            "id": f"block{i + 1}", "kind": "cube", "half_extents": (h, h, h),
            "color": colors[i], "x_range": _STRIP_X, "y_range": _STRIP_Y,
        })
    place_objects(s, specs, rng)
    s.named_points.update({
        "target_block1": (-0.09, -0.13),
        "target_block2": (0.0, -0.13),
        "target_block3": (0.09, -0.13),
    })
    s.targets = ["block1", "block2", "block3"]
    return s


def _build_blocks_ranking_rgb(seed: int) -> SceneState:
    s = _scene("blocks_ranking_rgb", seed)
    rng = scene_rng(s.task_id, seed)
    colors = ["red", "green", "blue"]
    specs = [_cube(f"{c}_block", c, x_range=_STRIP_X, y_range=_STRIP_Y) for c in colors]
    place_objects(s, specs, rng)
    s.named_points.update({
        "target_red_block": (-0.08, -0.13),
        "target_green_block": (0.0, -0.13),
        "target_blue_block": (0.08, -0.13),
    })
    s.targets = [f"{c}_block" for c in colors]
    return s


def _build_stack_blocks_three(seed: int) -> SceneState:
    s = _scene("stack_blocks_three", seed)
    rng = scene_rng(s.task_id, seed)
    colors = ["red", "green", "blue"]
    specs = [_cube(f"{c}_block", c, x_range=_STRIP_X, y_range=_STRIP_Y) for c in colors]
    place_objects(s, specs, rng)
    s.named_points["center"] = (0.0, -0.13)
    s.targets = [f"{c}_block" for c in colors]
    return s


def _build_stack_bowls_three(seed: int) -> SceneState:
    s = _scene("stack_bowls_three", seed)
    rng = scene_rng(s.task_id, seed)
    halves = (0.055, 0.045, 0.035)
    colors = ("white", "gray", "brown")
    specs = []
    for i, h in enumerate(halves):
        specs.append({
            "id": f"bowl{i + 1}", "kind": "container", "half_extents": (h, h, 0.02),
            "color": colors[i], "x_range": _STRIP_X, "y_range": _STRIP_Y,
        })
    place_objects(s, specs, rng)
    s.named_points["center"] = (0.0, -0.13)
    s.targets = ["bowl1", "bowl2", "bowl3"]
    return s


def _build_handover_mic(seed: int) -> SceneState:
    s = _scene("handover_mic", seed)
    rng = scene_rng(s.task_id, seed)
    place_objects(s, [
        {"id": "mic", "kind": "mic", "half_extents": (0.015, 0.015, 0.06),
         "color": "black", "x_range": (-0.30, -0.12), "y_range": (-0.18, 0.02)},
    ], rng)
    s.named_points["handover_point"] = (0.0, -0.05)
    s.targets = ["mic"]
    return s


def _build_handover_block(seed: int) -> SceneState:
    s = _scene("handover_block", seed)
    rng = scene_rng(s.task_id, seed)
    place_objects(s, [
        _cube("block", "red", x_range=(-0.30, -0.12), y_range=(-0.15, 0.05)),
        {"id": "blue_pad", "kind": "pad", "half_extents": (0.05, 0.05, 0.005),
         "color": "blue", "graspable": False, "x_range": (0.18, 0.28), "y_range": (0.08, 0.18)},
    ], rng)
    s.named_points["handover_point"] = (0.0, 0.0)
    s.targets = ["block"]
    return s


def _build_hanging_mug(seed: int) -> SceneState:
    s = _scene("hanging_mug", seed)
    rng = scene_rng(s.task_id, seed)
    place_objects(s, [
        {"id": "mug", "kind": "mug", "half_extents": (0.03, 0.03, 0.03),
         "color": "white", "x_range": (-0.30, -0.12), "y_range": (-0.18, 0.02)},
        {"id": "rack", "kind": "rack", "half_extents": (0.04, 0.04, 0.05),
         "color": "brown", "graspable": False, "x_range": (0.15, 0.28), "y_range": (-0.10, 0.05)},
    ], rng)
    s.named_points["handover_point"] = (0.0, -0.10)
    s.targets = ["mug"]
    return s


def _build_place_burger_fries(task_id: str):
    def build(seed: int) -> SceneState:
        s = _scene(task_id, seed)
        rng = scene_rng(task_id, seed)
        place_objects(s, [
            {"id": "tray", "kind": "tray", "half_extents": (0.09, 0.07, 0.01),
             "color": "white", "graspable": False, "x": 0.0, "y": -0.05},
            {"id": "burger", "kind": "burger", "half_extents": (0.035, 0.035, 0.025),
             "color": "orange", "x_range": (-0.28, -0.12), "y_range": (-0.20, 0.05)},
            {"id": "fries", "kind": "fries", "half_extents": (0.02, 0.02, 0.04),
             "color": "yellow", "x_range": (0.12, 0.28), "y_range": (-0.20, 0.05)},
        ], rng)
        tray = s.object("tray").pose.position
        s.named_points["target_burger"] = (tray[0] - 0.04, tray[1])
        s.named_points["target_fries"] = (tray[0] + 0.04, tray[1])
        s.targets = ["burger", "fries"]
        return s

    return build


def _build_place_object_basket(seed: int) -> SceneState:
    s = _scene("place_object_basket", seed)
    rng = scene_rng(s.task_id, seed)
    side = rng.choice((-1.0, 1.0))
    place_objects(s, [
        _cube("object", "yellow",
              x_range=(0.10 * side, 0.28 * side) if side > 0 else (-0.28, -0.10),
              y_range=(-0.18, 0.02)),
        {"id": "basket", "kind": "basket", "half_extents": (0.06, 0.05, 0.03),
         "color": "brown", "x_range": (-0.06, 0.06), "y_range": (-0.15, 0.0)},
    ], rng)
    basket = s.object("basket").pose.position
    shift = 0.14 if side < 0 else -0.14
    s.named_points["basket_target"] = (basket[0] + shift, basket[1])
    s.targets = ["object", "basket"]
    return s


def _build_place_bread_skillet(task_id: str, skillet_graspable: bool):
    def build(seed: int) -> SceneState:
        s = _scene(task_id, seed)
        rng = scene_rng(task_id, seed)
        side = rng.choice((-1.0, 1.0))
        lo, hi = (0.08, 0.22) if side > 0 else (-0.22, -0.08)
        blo, bhi = (0.08, 0.25) if side > 0 else (-0.25, -0.08)
        place_objects(s, [
            {"id": "skillet", "kind": "skillet", "half_extents": (0.07, 0.06, 0.015),
             "color": "black", "graspable": skillet_graspable,
             "x_range": (lo, hi), "y_range": (-0.15, 0.0)},
            {"id": "bread", "kind": "bread", "half_extents": (0.03, 0.02, 0.02),
             "color": "brown", "x_range": (blo, bhi), "y_range": (-0.18, 0.05)},
        ], rng)
        s.named_points["center"] = (0.0, -0.13)
        s.targets = ["bread", "skillet"] if skillet_graspable else ["bread"]
        return s

    return build


def _build_blocks_tower(seed: int) -> SceneState:
    s = _scene("blocks_tower", seed)
    rng = scene_rng(s.task_id, seed)
    colors = ["red", "green", "blue", "yellow"]
    rng.shuffle(colors)
    halves = (0.032, 0.028, 0.024, 0.020)
    specs = []
    for i, h in enumerate(halves):
        specs.append({
            "id": f"block{i + 1}", "kind": "cube", "half_extents": (h, h, h),
            "color": colors[i], "x_range": _STRIP_X, "y_range": _STRIP_Y,
        })
    place_objects(s, specs, rng)
    s.named_points["center"] = (0.0, -0.13)
    s.targets = ["block1", "block2", "block3", "block4"]
    return s


def _build_put_bottles_dustbin(seed: int) -> SceneState:
    s = _scene("put_bottles_dustbin", seed)
    rng = scene_rng(s.task_id, seed)
    place_objects(s, [
        {"id": "dustbin", "kind": "dustbin", "half_extents": (0.05, 0.05, 0.06),
         "color": "gray", "graspable": False, "x": -0.28, "y": -0.05},
        {"id": "bottle1", "kind": "bottle", "half_extents": (0.02, 0.02, 0.045),
         "color": "green", "x_range": (-0.18, -0.08), "y_range": (-0.18, 0.02)},
        {"id": "bottle2", "kind": "bottle", "half_extents": (0.02, 0.02, 0.045),
         "color": "blue", "x_range": (0.08, 0.25), "y_range": (-0.18, 0.02)},
    ], rng)
    dustbin = s.object("dustbin").pose.position
    s.named_points["target_bottle1"] = (dustbin[0] - 0.03, dustbin[1])
    s.named_points["target_bottle2"] = (dustbin[0] + 0.03, dustbin[1])
    s.named_points["handover_point"] = (0.0, -0.02)
    s.targets = ["bottle1", "bottle2"]
    return s


def _build_place_object_scale(seed: int) -> SceneState:
    s = _scene("place_object_scale", seed)
    rng = scene_rng(s.task_id, seed)
    side = rng.choice((-1.0, 1.0))
    lo, hi = (0.10, 0.28) if side > 0 else (-0.28, -0.10)
    place_objects(s, [
        {"id": "scale", "kind": "scale", "half_extents": (0.05, 0.05, 0.02),
         "color": "white", "graspable": False, "x": 0.0, "y": -0.05},
        _cube("object", "red", x_range=(lo, hi), y_range=(-0.18, 0.02)),
    ], rng)
    s.targets = ["object"]
    return s


def _build_grab_roller(seed: int) -> SceneState:
    s = _scene("grab_roller", seed)
    rng = scene_rng(s.task_id, seed)
    place_objects(s, [
        {"id": "roller", "kind": "roller", "half_extents": (0.10, 0.02, 0.025),
         "color": "orange", "dual_grasp": True,
         "x_range": (-0.05, 0.05), "y_range": (-0.15, -0.02)},
    ], rng)
    s.targets = ["roller"]
    return s


def _build_stack_blocks_two(seed: int) -> SceneState:
    s = _scene("stack_blocks_two", seed)
    rng = scene_rng(s.task_id, seed)
    place_objects(s, [
        _cube("block1", "red", x_range=(-0.28, 0.28), y_range=(-0.20, 0.05)),
        _cube("block2", "green", x_range=(-0.28, 0.28), y_range=(-0.20, 0.05)),
    ], rng)
    s.named_points["center"] = (0.0, -0.13)
    s.targets = ["block1", "block2"]
    return s


_BUILDERS: dict[str, Callable[[int], SceneState]] = {
    "spatial_sparse": _build_spatial("sparse"),
    "spatial_dense": _build_spatial("dense"),
    "spatial_cluttered": _build_spatial("cluttered"),
    "place_cans_plasticbox": _build_place_cans_plasticbox,
    "blocks_cross_shape": _build_blocks_cross_shape,
    "blocks_ranking_size": _build_blocks_ranking_size,
    "blocks_ranking_rgb": _build_blocks_ranking_rgb,
    "stack_blocks_three": _build_stack_blocks_three,
    "stack_bowls_three": _build_stack_bowls_three,
    "handover_mic": _build_handover_mic,
    "handover_block": _build_handover_block,
    "hanging_mug": _build_hanging_mug,
    "place_burger_fries": _build_place_burger_fries("place_burger_fries"),
    "place_object_basket": _build_place_object_basket,
    "place_bread_skillet": _build_place_bread_skillet("place_bread_skillet", False),
    "blocks_tower": _build_blocks_tower,
    "put_bottles_dustbin": _build_put_bottles_dustbin,
    "place_object_scale": _build_place_object_scale,
    "place_burger_fries_low": _build_place_burger_fries("place_burger_fries_low"),
    "place_bread_skillet_low": _build_place_bread_skillet("place_bread_skillet_low", True),
    "grab_roller": _build_grab_roller,
    "stack_blocks_two": _build_stack_blocks_two,
}


# ---------------------------------------------------------------------------
# predicate atoms

def _resolve_xy(state: SceneState, name: str) -> tuple[float, float]:
    if name in state.named_points:
        return state.named_points[name]
    obj = state.object(name)
    if obj is None:
        raise UnknownTask(f"unresolvable predicate target {name!r}")
    return obj.pose.position[0], obj.pose.position[1]


def _atom_on_top_of(state, a, b, xy_tol=0.025, z_tol=0.01):
    oa, ob = state.object(a), state.object(b)
    if oa is None or ob is None:
        return False
    pa, pb = oa.pose.position, ob.pose.position
    if math.hypot(pa[0] - pb[0], pa[1] - pb[1]) > xy_tol:
        return False
    return abs(oa.bottom_z - ob.top_z) <= z_tol


def _atom_within_xy(state, a, target, tol=0.05):
    oa = state.object(a)
    if oa is None:
        return False
    tx, ty = _resolve_xy(state, target)
    p = oa.pose.position
    return math.hypot(p[0] - tx, p[1] - ty) <= tol


def _atom_inside(state, a, container):
    oa, oc = state.object(a), state.object(container)
    if oa is None or oc is None:
        return False
    pa, pc = oa.pose.position, oc.pose.position
    hc = oc.half_extents
    if abs(pa[0] - pc[0]) > hc[0] or abs(pa[1] - pc[1]) > hc[1]:
        return False
    rel = oa.bottom_z - oc.top_z
    return -2.0 * hc[2] - 1e-6 <= rel <= 0.021


def _atom_held_by(state, a, arm):
    return state.arms[arm].attached_object == a


def _atom_ever_held_by(state, a, arm):
    return (a, arm) in state.held_history or _atom_held_by(state, a, arm)


def _atom_ordered_by_x(state, ids, min_sep=0.03):
    xs = []
    for oid in ids:
        o = state.object(oid)
        if o is None:
            return False
        xs.append(o.pose.position[0])
    return all(xs[i + 1] - xs[i] >= min_sep for i in range(len(xs) - 1))


def _atom_above_height(state, a, z_min):
    o = state.object(a)
    return o is not None and o.pose.position[2] > z_min


def _atom_at_origin(state, arm):
    from .world import ARMS

    p = state.arms[arm].pose.position
    b = ARMS[arm].base_origin.position
    return math.dist(p, b) < 0.01


def _atom_stacked(state, a, b, xy_tol=0.025, z_tol=0.01):
    return _atom_on_top_of(state, a, b, xy_tol, z_tol) or _atom_on_top_of(state, b, a, xy_tol, z_tol)


_ATOMS = {
    "on_top_of": _atom_on_top_of,
    "within_xy": _atom_within_xy,
    "inside": _atom_inside,
    "held_by": _atom_held_by,
    "ever_held_by": _atom_ever_held_by,
    "ordered_by_x": _atom_ordered_by_x,
    "above_height": _atom_above_height,
    "at_origin": _atom_at_origin,
    "stacked": _atom_stacked,
}


def eval_atom(state: SceneState, atom) -> bool:
    name, *args = atom
    return _ATOMS[name](state, *args)


def evaluate_success(task: TaskSpec, state: SceneState) -> bool:
    """True when every predicate atom holds. No arm may still hold an object
    that a placement atom constrains (held objects have not been released)."""
    for atom in task.predicate:
        if not eval_atom(state, atom):
            return False
        if atom[0] in ("on_top_of", "within_xy", "inside", "stacked"):
            if state.holder_arms(atom[1]):
                return False
    return True


def object_goal_atoms(task: TaskSpec, obj_id: str):
    return [a for a in task.predicate
            if a[0] in ("on_top_of", "within_xy", "inside", "stacked") and a[1] == obj_id]


def object_goal_satisfied(task: TaskSpec, state: SceneState, obj_id: str) -> bool:
    """True when every placement atom about obj_id already holds (and there is
    at least one such atom)."""
    atoms = object_goal_atoms(task, obj_id)
    if not atoms:
        return False
    return all(eval_atom(state, a) for a in atoms) and not state.holder_arms(obj_id)


# ---------------------------------------------------------------------------
# per-task context block

def _fmt(v: float) -> str:
    return f"{v:.5f}"


def _pos3(p) -> str:
    return f"[{_fmt(p[0])}, {_fmt(p[1])}, {_fmt(p[2])}]"


def _pose7(x, y, z, q=(0.0, 1.0, 0.0, 0.0)) -> str:
    return f"[{_fmt(x)}, {_fmt(y)}, {_fmt(z)}, {_fmt(q[0])}, {_fmt(q[1])}, {_fmt(q[2])}, {_fmt(q[3])}]"


def _object_lines(state: SceneState, ids=None) -> list[str]:
    lines = []
    for o in state.objects:
        if ids is not None and o.id not in ids:
            continue
        lines.append(f"- {o.id} ({o.color} {o.kind}): position {_pos3(o.pose.position)}, "
                     f"half size [{_fmt(o.half_extents[0])}, {_fmt(o.half_extents[1])}, {_fmt(o.half_extents[2])}]")
    return lines


def _target_pose_lines(state: SceneState, items: list[tuple[str, str, float]]) -> list[str]:
    lines = []
    for label, point, z in items:
        tx, ty = state.named_points[point]
        lines.append(f"- {_pose7(tx, ty, z)} is the target_pose of {label}")
    return lines


def assistant_info(task: TaskSpec, state: SceneState) -> str:
    """Task context handed to the agent alongside the instruction."""
    if task.tier == "spatial":
        names = ", ".join(state.targets)
        return (f"The tabletop work cell has two arms: the left arm base is on the left "
                f"(negative x) and the right arm base is on the right (positive x). "
                f"Target cubes: {names}. Assign each cube to the arm that can grasp it.")

    lines = ["Scene objects:"] + _object_lines(state)
    q = DOWN_QUAT
    lines.append(f"The recommended downward gripper orientation quaternion is "
                 f"[{_fmt(q.x)}, {_fmt(q.y)}, {_fmt(q.z)}, {_fmt(q.w)}].")

    if task.tier == "low_level":
        lines.append("The gripper's height is approximately 0.162m, so a gripper target "
                     "z should be the intended grasp or place height plus 0.162.")
        for tag in ("left", "right"):
            a = state.arms[tag]
            lines.append(f"The {tag} arm end effector is at {_pos3(a.pose.position)} "
                         f"with gripper opening {_fmt(a.gripper)}.")

    tp: list[tuple[str, str, float]] = []
    t = TABLE_TOP_Z
    if task.id == "place_cans_plasticbox":
        box = state.object("plasticbox")
        tp = [("can_left", "target_can_left", box.top_z + 0.04),
              ("can_right", "target_can_right", box.top_z + 0.04)]
        lines.append("Main steps: each arm grasps the can on its own side and places it "
                     "into the plasticbox, then returns to origin.")
    elif task.id == "blocks_cross_shape":
        tp = [(f"{c}_block", f"target_{c}_block", t + CUBE_HALF)
              for c in ("red", "black", "blue", "green", "yellow")]
        lines.append("Main steps: move each block in turn to its cross-shape slot, using "
                     "the arm on the block's side of the table.")
    elif task.id == "blocks_ranking_size":
        for i in (1, 2, 3):
            o = state.object(f"block{i}")
            tp.append((f"block{i}", f"target_block{i}", t + o.half_extents[2]))
        lines.append("block1 is the largest block and block3 is the smallest. Main steps: "
                     "place block1 at the left slot, block2 in the middle, block3 at the right.")
    elif task.id == "blocks_ranking_rgb":
        tp = [(f"{c}_block", f"target_{c}_block", t + CUBE_HALF)
              for c in ("red", "green", "blue")]
        lines.append("Main steps: place the red block at the left slot, the green block in "
                     "the middle, and the blue block at the right slot.")
    elif task.id in ("stack_blocks_three", "stack_bowls_three", "blocks_tower"):
        cx, cy = state.named_points["center"]
        lines.append(f"The stack should be built at table center [{_fmt(cx)}, {_fmt(cy)}].")
        lines.append("Main steps: place the bottom object at the center first, then stack "
                     "the rest on top of it one by one, largest to smallest.")
    elif task.id == "handover_mic":
        hx, hy = state.named_points["handover_point"]
        lines.append(f"Main steps: the left arm grasps the mic, moves it to the handover "
                     f"point [{_fmt(hx)}, {_fmt(hy)}] at a raised height, then the right arm "
                     f"grasps the mic while the left arm opens its gripper.")
    elif task.id == "handover_block":
        pad = state.object("blue_pad")
        tp = [("block", "handover_point", 0.90 - GRIPPER_HEIGHT_OFFSET)]
        lines.append(f"Main steps: the left arm grasps the block and places it near the "
                     f"table center, the right arm picks it up and places it on the blue pad "
                     f"at {_pos3(pad.pose.position)}.")
    elif task.id == "hanging_mug":
        rack = state.object("rack")
        hx, hy = state.named_points["handover_point"]
        lines.append(f"Main steps: the left arm puts the mug down near [{_fmt(hx)}, {_fmt(hy)}], "
                     f"then the right arm picks it up and places it on top of the rack at "
                     f"{_pos3(rack.pose.position)} (rack top z {_fmt(rack.top_z)}).")
    elif task.id in ("place_burger_fries", "place_burger_fries_low"):
        tray = state.object("tray")
        burger = state.object("burger")
        fries = state.object("fries")
        tp = [("burger", "target_burger", tray.top_z + burger.half_extents[2]),
              ("fries", "target_fries", tray.top_z + fries.half_extents[2])]
        lines.append("Main steps: the left arm places the burger on the tray, the right arm "
                     "places the fries on the tray.")
    elif task.id == "place_object_basket":
        basket = state.object("basket")
        bx, by = state.named_points["basket_target"]
        obj = state.object("object")
        lines.append(f"Main steps: the arm nearest the object places it inside the basket at "
                     f"{_pos3(basket.pose.position)} (basket top z {_fmt(basket.top_z)}), then "
                     f"the other arm grasps the basket, lifts it, moves it so its center "
                     f"reaches [{_fmt(bx)}, {_fmt(by)}], and releases it.")
        tx, ty = basket.pose.position[0], basket.pose.position[1]
        lines.append(f"- {_pose7(tx, ty, basket.top_z + obj.half_extents[2])} is the "
                     f"target_pose of object")
    elif task.id in ("place_bread_skillet", "place_bread_skillet_low"):
        skillet = state.object("skillet")
        bread = state.object("bread")
        if task.id == "place_bread_skillet_low":
            cx, cy = state.named_points["center"]
            lines.append(f"Main steps: first move the skillet so its center is at "
                         f"[{_fmt(cx)}, {_fmt(cy)}], then put the bread into the skillet.")
        else:
            lines.append("Main steps: the arm on the bread's side grasps the bread and places "
                         "it into the skillet.")
        tx, ty = skillet.pose.position[0], skillet.pose.position[1]
        lines.append(f"- {_pose7(tx, ty, skillet.top_z + bread.half_extents[2])} is the "
                     f"target_pose of bread (for the skillet's current position)")
    elif task.id == "put_bottles_dustbin":
        dustbin = state.object("dustbin")
        b1 = state.object("bottle1")
        tp = [("bottle1", "target_bottle1", dustbin.top_z + b1.half_extents[2]),
              ("bottle2", "target_bottle2", dustbin.top_z + b1.half_extents[2])]
        hx, hy = state.named_points["handover_point"]
        lines.append(f"The dustbin is near the left edge and only the left arm can reach it. "
                     f"Main steps: the left arm puts bottle1 into the dustbin; the right arm "
                     f"moves bottle2 to the relay point [{_fmt(hx)}, {_fmt(hy)}] and releases "
                     f"it, then the left arm moves it into the dustbin.")
    elif task.id == "place_object_scale":
        scale = state.object("scale")
        obj = state.object("object")
        tx, ty = scale.pose.position[0], scale.pose.position[1]
        lines.append(f"Main steps: the arm on the object's side grasps the object and places "
                     f"it on top of the scale (scale top z {_fmt(scale.top_z)}).")
        lines.append(f"- {_pose7(tx, ty, scale.top_z + obj.half_extents[2])} is the "
                     f"target_pose of object")
    elif task.id == "grab_roller":
        roller = state.object("roller")
        p = roller.pose.position
        hx = roller.half_extents[0]
        lines.append(f"Main steps: the left gripper closes on the roller's left end near "
                     f"[{_fmt(p[0] - hx + 0.02)}, {_fmt(p[1])}, {_fmt(p[2])}] and the right "
                     f"gripper closes on the right end near "
                     f"[{_fmt(p[0] + hx - 0.02)}, {_fmt(p[1])}, {_fmt(p[2])}] in the same "
                     f"step, then both arms lift together to z>0.8.")
    elif task.id == "stack_blocks_two":
        cx, cy = state.named_points["center"]
        lines.append(f"Main steps: place one block at the table center [{_fmt(cx)}, "
                     f"{_fmt(cy)}], then stack the other block on top of it.")

    if tp:
        lines.extend(_target_pose_lines(state, tp))
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# registry loading

_REGISTRY: dict[str, TaskSpec] | None = None


def _load_registry() -> dict[str, TaskSpec]:
    raw = json.loads(
        resources.files("dualarm.data").joinpath("task_registry.json").read_text()
    )
    registry: dict[str, TaskSpec] = {}
    codes: set[str] = set()
    for task_id, entry in raw.items():
        if task_id not in _BUILDERS:
            raise RegistryError(f"task {task_id!r} has no scene builder")
        for key in ("code", "tier", "coordination", "instruction",
                    "max_chunk_size", "max_plan_rounds", "predicate"):
            if key not in entry:
                raise RegistryError(f"task {task_id!r} missing field {key!r}")
        if entry["tier"] not in TIERS:
            raise RegistryError(f"task {task_id!r} has unknown tier {entry['tier']!r}")
        if entry["coordination"] not in COORDINATIONS:
            raise RegistryError(f"task {task_id!r} has unknown coordination "
                                f"{entry['coordination']!r}")
        if entry["code"] in codes:
            raise RegistryError(f"duplicate task code {entry['code']!r}")
        codes.add(entry["code"])
        predicate = []
        for atom in entry["predicate"]:
            if not atom or atom[0] not in _ATOMS:
                raise RegistryError(f"task {task_id!r} has unknown predicate atom {atom!r}")
            predicate.append(tuple(tuple(a) if isinstance(a, list) else a for a in atom))
        registry[task_id] = TaskSpec(
            id=task_id,
            code=entry["code"],
            tier=entry["tier"],
            coordination=entry["coordination"],
            instruction=entry["instruction"],
            max_chunk_size=int(entry["max_chunk_size"]),
            max_plan_rounds=int(entry["max_plan_rounds"]),
            predicate=tuple(predicate),
            build_scene=_BUILDERS[task_id],
        )
    missing = [t for t in CANONICAL_TASK_IDS if t not in registry]
    if missing:
        raise RegistryError(f"registry is missing canonical tasks: {missing}")
    return registry


def get_registry() -> dict[str, TaskSpec]:
    global _REGISTRY
    if _REGISTRY is None:
        _REGISTRY = _load_registry()
    return _REGISTRY


def get_task(task_id: str) -> TaskSpec:
    registry = get_registry()
    if task_id not in registry:
        raise UnknownTask(task_id)
    return registry[task_id]
