"""Scene model: table, objects, dual-arm geometry, reachability, seeding.

World-frame conventions: +x right, +y into the scene, +z up. The left arm
base sits at negative x, the right arm at positive x. Ground-truth arm
assignment for an object is the sign of its x coordinate.
"""
from __future__ import annotations

import hashlib
import math
import random
import zlib
from dataclasses import dataclass, field

from .errors import PlacementFailure, UnknownTask
from .geometry import Aabb, Pose, Quaternion

TABLE_TOP_Z = 0.71449
CUBE_HALF = 0.025
GRIPPER_HEIGHT_OFFSET = 0.162
REACH_RADIUS = 0.65

LEFT_BASE = Pose((-0.3495, -0.2523, 0.94049), Quaternion(0.70711, -1e-05, 1e-05, 0.70711))
RIGHT_BASE = Pose((0.3505, -0.2523, 0.94049), Quaternion(0.70711, -1e-05, 1e-05, 0.70711))

# gripper orientation pointing straight down, recommended for placing
DOWN_QUAT = Quaternion(0.5, -0.5, 0.5, 0.5)

OBJECT_KINDS = (
    "cube", "container", "tray", "roller", "mug", "rack", "bottle", "dustbin",
    "skillet", "scale", "burger", "fries", "bread", "basket", "mic", "pad",
    "distractor",
)
COLORS = ("red", "green", "blue", "yellow", "black", "white", "gray", "brown", "orange")


@dataclass(frozen=True)
class ArmConfig:
    tag: str  # "left" | "right"
    base_origin: Pose
    reach_radius: float = REACH_RADIUS
    gripper_height_offset: float = GRIPPER_HEIGHT_OFFSET


LEFT_ARM = ArmConfig("left", LEFT_BASE)
RIGHT_ARM = ArmConfig("right", RIGHT_BASE)
ARMS = {"left": LEFT_ARM, "right": RIGHT_ARM}


@dataclass
class ObjectInstance:
    id: str
    kind: str
    pose: Pose
    half_extents: tuple[float, float, float]
    color: str = "gray"
    graspable: bool = True
    dual_grasp: bool = False  # needs both arms closing in the same step

    def aabb(self, margin: float = 0.0) -> Aabb:
        p, h = self.pose.position, self.half_extents
        return Aabb(
            (p[0] - h[0] - margin, p[1] - h[1] - margin, p[2] - h[2] - margin),
            (p[0] + h[0] + margin, p[1] + h[1] + margin, p[2] + h[2] + margin),
        )

    @property
    def top_z(self) -> float:
        return self.pose.position[2] + self.half_extents[2]

    @property
    def bottom_z(self) -> float:
        return self.pose.position[2] - self.half_extents[2]


@dataclass
class ArmState:
    pose: Pose
    gripper: float = 1.0
    attached_object: str | None = None
    # xy offset of the held object's center relative to the gripper
    attach_offset: tuple[float, float] = (0.0, 0.0)


@dataclass
class SceneState:
    table_top_z: float
    objects: list[ObjectInstance]
    arms: dict[str, ArmState]
    step_index: int = 0
    rng_seed: int = 0
    task_id: str = ""
    targets: list[str] = field(default_factory=list)  # ids the task cares about
    named_points: dict[str, tuple[float, float]] = field(default_factory=dict)
    held_history: set[tuple[str, str]] = field(default_factory=set)  # (object, arm)

    def object(self, object_id: str) -> ObjectInstance | None:
        for o in self.objects:
            if o.id == object_id:
                return o
        return None

    def holder_arms(self, object_id: str) -> list[str]:
        return [tag for tag in ("left", "right") if self.arms[tag].attached_object == object_id]

    def clone(self) -> "SceneState":
        return SceneState(
            table_top_z=self.table_top_z,
            objects=[
                ObjectInstance(o.id, o.kind, o.pose, o.half_extents, o.color, o.graspable, o.dual_grasp)
                for o in self.objects
            ],
            arms={
                tag: ArmState(a.pose, a.gripper, a.attached_object, a.attach_offset)
                for tag, a in self.arms.items()
            },
            step_index=self.step_index,
            rng_seed=self.rng_seed,
            task_id=self.task_id,
            targets=list(self.targets),
            named_points=dict(self.named_points),
            held_history=set(self.held_history),
        )


@dataclass(frozen=True)
class TierOneConfig:
    setting: str  # "sparse" | "dense" | "cluttered"
    cube_count: int
    distractor_count: int
    x_range: tuple[float, float] = (-0.30, 0.30)
    y_range: tuple[float, float] = (-0.20, 0.05)


TIER_ONE_CONFIGS = {
    "sparse": TierOneConfig("sparse", cube_count=3, distractor_count=0),
    "dense": TierOneConfig("dense", cube_count=5, distractor_count=0),
    "cluttered": TierOneConfig("cluttered", cube_count=3, distractor_count=2),
}


def default_arm_state(tag: str) -> ArmState:
    return ArmState(ARMS[tag].base_origin, gripper=1.0)


def empty_scene(seed: int, task_id: str = "") -> SceneState:
    return SceneState(
        table_top_z=TABLE_TOP_Z,
        objects=[],
        arms={"left": default_arm_state("left"), "right": default_arm_state("right")},
        rng_seed=seed,
        task_id=task_id,
    )


def scene_rng(task_id: str, seed: int) -> random.Random:
    """Deterministic per-(task, seed) RNG, stable across platforms."""
    return random.Random((seed & 0xFFFFFFFFFFFFFFFF) * 0x100000000 + zlib.crc32(task_id.encode()))


def reachable(arm: ArmConfig, p: tuple[float, float, float]) -> bool:
    """Horizontal-distance reachability from the arm base."""
    bx, by, _ = arm.base_origin.position
    return math.hypot(p[0] - bx, p[1] - by) <= arm.reach_radius


def ground_truth_arm(obj: ObjectInstance) -> str:
    """Left for x < 0, right otherwise (the x = 0 tie goes right)."""
    return "left" if obj.pose.position[0] < 0.0 else "right"


def place_objects(
    scene: SceneState,
    specs: list[dict],
    rng: random.Random,
    margin: float = 0.01,
    max_attempts: int = 1000,
) -> None:
    """Rejection-sample non-overlapping resting placements for `specs`.

    Each spec: id, kind, half_extents, color, graspable, dual_grasp,
    x_range, y_range (sampled) or fixed (x, y). Objects rest on the table.
    """
    for spec in specs:
        h = spec["half_extents"]
        for attempt in range(max_attempts):
            if "x" in spec:
                x, y = spec["x"], spec["y"]
            else:
                x = rng.uniform(*spec["x_range"])
                y = rng.uniform(*spec["y_range"])
            obj = ObjectInstance(
                id=spec["id"],
                kind=spec["kind"],
                pose=Pose((x, y, scene.table_top_z + h[2]), Quaternion.identity()),
                half_extents=h,
                color=spec.get("color", "gray"),
                graspable=spec.get("graspable", True),
                dual_grasp=spec.get("dual_grasp", False),
            )
            box = obj.aabb(margin)
            if any(box.overlaps(o.aabb()) for o in scene.objects):
                if "x" in spec:
                    raise PlacementFailure(f"fixed placement of {spec['id']} overlaps")
                continue
            scene.objects.append(obj)
            break
        else:
            raise PlacementFailure(f"could not place {spec['id']} after {max_attempts} attempts")


def generate_scene(task_id: str, seed: int) -> SceneState:
    """Deterministically generate the initial scene for (task_id, seed)."""
    from .tasks import get_registry  # late import; tasks builds on world

    registry = get_registry()
    if task_id not in registry:
        raise UnknownTask(task_id)
    return registry[task_id].build_scene(seed)


def serialize_scene(state: SceneState) -> str:
    """Canonical text record: stable field order, 6-decimal fixed formatting."""

    def f(v: float) -> str:
        s = f"{v:.6f}"
        return "0.000000" if s == "-0.000000" else s

    lines = [
        f"task={state.task_id}",
        f"seed={state.rng_seed}",
        f"step={state.step_index}",
        f"table_top_z={f(state.table_top_z)}",
    ]
    for tag in ("left", "right"):
        a = state.arms[tag]
        p, q = a.pose.position, a.pose.orientation
        lines.append(
            f"arm {tag} pos={f(p[0])},{f(p[1])},{f(p[2])} "
            f"quat={f(q.x)},{f(q.y)},{f(q.z)},{f(q.w)} "
            f"gripper={f(a.gripper)} attached={a.attached_object or '-'}"
        )
    for o in sorted(state.objects, key=lambda o: o.id):
        p = o.pose.position
        h = o.half_extents
        lines.append(
            f"object {o.id} kind={o.kind} color={o.color} "
            f"pos={f(p[0])},{f(p[1])},{f(p[2])} half={f(h[0])},{f(h[1])},{f(h[2])} "
            f"graspable={int(o.graspable)} dual={int(o.dual_grasp)}"
        )
    for name in sorted(state.named_points):
        x, y = state.named_points[name]
        lines.append(f"point {name}={f(x)},{f(y)}")
    for obj, arm in sorted(state.held_history):
        lines.append(f"held {obj} {arm}")
    return "\n".join(lines) + "\n"


def scene_hash(state: SceneState) -> str:
    return hashlib.sha256(serialize_scene(state).encode()).hexdigest()
