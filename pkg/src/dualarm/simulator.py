"""Deterministic kinematic stepping for the dual-arm scene.

No dynamics: objects only move while attached to an arm (or riding on a
moved object), and a released object settles straight down (or up, out of a
shallow overlap) onto its highest support. Anomalies are reported as events
rather than exceptions so an episode can continue and replan.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import AlreadyHolding
from .geometry import LowLevelAction, Pose, Quaternion, slerp
from .world import GRIPPER_HEIGHT_OFFSET, ARMS, ObjectInstance, SceneState, reachable


@dataclass(frozen=True)
class MotionLimits:
    max_translation_per_substep: float = 0.02
    max_rotation_per_substep: float = 0.1
    substeps_per_action: int = 50


@dataclass(frozen=True)
class SimEvent:
    kind: str  # collision_arm_arm | collision_table | collision_object |
    #            grasp_success | grasp_miss | release | unreachable_target
    step: int
    detail: str = ""


@dataclass(frozen=True)
class SimConfig:
    limits: MotionLimits = field(default_factory=MotionLimits)
    grasp_tolerance: float = 0.03
    close_threshold: float = 0.5
    r_ee: float = 0.05


# dual-grasp end points sit this far inboard from the object's x extent
DUAL_END_INSET = 0.02
_EPS = 1e-9


class Simulator:
    def __init__(self, config: SimConfig | None = None):
        self.config = config or SimConfig()

    # -- geometry helpers -------------------------------------------------

    @staticmethod
    def grasp_point(pose: Pose) -> tuple[float, float, float]:
        p = pose.position
        return (p[0], p[1], p[2] - GRIPPER_HEIGHT_OFFSET)

    def _support_top(self, state: SceneState, obj: ObjectInstance) -> tuple[float, str]:
        """Highest resting surface under obj's xy footprint."""
        best, detail = state.table_top_z, "table"
        ox, oy, _ = obj.pose.position
        hx, hy = obj.half_extents[0], obj.half_extents[1]
        for o in state.objects:
            if o.id == obj.id:
                continue
            px, py, _ = o.pose.position
            if abs(px - ox) < hx + o.half_extents[0] and abs(py - oy) < hy + o.half_extents[1]:
                if o.bottom_z < obj.bottom_z + 1e-6 and o.top_z > best:
                    best, detail = o.top_z, o.id
        return best, detail

    def _riders(self, state: SceneState, obj: ObjectInstance) -> list[ObjectInstance]:
        out = []
        ox, oy, _ = obj.pose.position
        hx, hy = obj.half_extents[0], obj.half_extents[1]
        for o in state.objects:
            if o.id == obj.id or state.holder_arms(o.id):
                continue
            px, py, _ = o.pose.position
            if (
                abs(px - ox) < hx + o.half_extents[0]
                and abs(py - oy) < hy + o.half_extents[1]
                and abs(o.bottom_z - obj.top_z) < 0.005
            ):
                out.append(o)
        return out

    def _rider_ids(self, state: SceneState, obj: ObjectInstance) -> set[str]:
        out: set[str] = set()
        frontier = [obj]
        while frontier:
            for r in self._riders(state, frontier.pop()):
                if r.id not in out:
                    out.add(r.id)
                    frontier.append(r)
        return out

    def _translate(self, state: SceneState, obj: ObjectInstance, dx: float, dy: float, dz: float):
        riders = self._riders(state, obj)
        x, y, z = obj.pose.position
        obj.pose = obj.pose.with_position((x + dx, y + dy, z + dz))
        for r in riders:
            self._translate(state, r, dx, dy, dz)

    def settle(self, state: SceneState, obj: ObjectInstance) -> float:
        """Drop (or pop) a free object onto its support; returns the drop."""
        top, _ = self._support_top(state, obj)
        target_z = top + obj.half_extents[2]
        dz = target_z - obj.pose.position[2]
        if abs(dz) > _EPS:
            self._translate(state, obj, 0.0, 0.0, dz)
        return -dz

    def _min_gripper_z(self, state: SceneState, tag: str, at_xy: tuple[float, float]) -> tuple[float, str]:
        """Lowest allowed gripper z at an xy location for this arm."""
        arm = state.arms[tag]
        held = state.object(arm.attached_object) if arm.attached_object else None
        if held is None:
            return state.table_top_z + GRIPPER_HEIGHT_OFFSET, "table"
        # the held object's footprint travels with the gripper; anything
        # riding on the held object travels too and cannot support it
        riders = self._rider_ids(state, held)
        ox = at_xy[0] + arm.attach_offset[0]
        oy = at_xy[1] + arm.attach_offset[1]
        hx, hy, hz = held.half_extents
        best, detail = state.table_top_z, "table"
        for o in state.objects:
            if o.id == held.id or o.id in riders:
                continue
            if state.holder_arms(o.id):
                continue
            px, py, _ = o.pose.position
            if abs(px - ox) < hx + o.half_extents[0] and abs(py - oy) < hy + o.half_extents[1]:
                if o.top_z > best:
                    best, detail = o.top_z, o.id
        return best + 2.0 * hz + GRIPPER_HEIGHT_OFFSET, detail

    def _sync_attachment(self, state: SceneState, tag: str):
        arm = state.arms[tag]
        if not arm.attached_object:
            return
        obj = state.object(arm.attached_object)
        if obj is None:
            return
        holders = state.holder_arms(obj.id)
        if obj.dual_grasp and holders and holders[0] != tag:
            return  # dual-held objects follow their primary (first) holder
        gx, gy, gz = arm.pose.position
        nx = gx + arm.attach_offset[0]
        ny = gy + arm.attach_offset[1]
        nz = gz - GRIPPER_HEIGHT_OFFSET - obj.half_extents[2]
        ox, oy, oz = obj.pose.position
        self._translate(state, obj, nx - ox, ny - oy, nz - oz)

    # -- attach / release -------------------------------------------------

    def try_attach(self, state: SceneState, tag: str) -> str | None:
        """Attach the nearest graspable object within tolerance, if any.

        Objects held by the other arm are eligible too (handover transfer);
        dual-grasp objects are excluded here and handled jointly.
        """
        arm = state.arms[tag]
        if arm.attached_object:
            raise AlreadyHolding(tag)
        gp = self.grasp_point(arm.pose)
        best: ObjectInstance | None = None
        best_d = self.config.grasp_tolerance + _EPS
        other = "right" if tag == "left" else "left"
        for o in sorted(state.objects, key=lambda o: o.id):
            if not o.graspable or o.dual_grasp:
                continue
            holders = state.holder_arms(o.id)
            if holders and holders != [other]:
                continue
            p = o.pose.position
            d = math.dist(gp, p)
            if d < best_d - _EPS:
                best, best_d = o, d
        if best is None:
            return None
        if state.arms[other].attached_object == best.id:
            state.arms[other].attached_object = None
            state.arms[other].attach_offset = (0.0, 0.0)
        arm.attached_object = best.id
        arm.attach_offset = (best.pose.position[0] - arm.pose.position[0],
                             best.pose.position[1] - arm.pose.position[1])
        state.held_history.add((best.id, tag))
        self._sync_attachment(state, tag)
        return best.id

    def _try_dual_attach(self, state: SceneState) -> str | None:
        """Both arms closed this step: attach a dual-grasp object if both
        grasp points are on their respective ends within tolerance."""
        lp = self.grasp_point(state.arms["left"].pose)
        rp = self.grasp_point(state.arms["right"].pose)
        for o in sorted(state.objects, key=lambda o: o.id):
            if not (o.graspable and o.dual_grasp) or state.holder_arms(o.id):
                continue
            cx, cy, cz = o.pose.position
            inset = max(o.half_extents[0] - DUAL_END_INSET, 0.0)
            left_end = (cx - inset, cy, cz)
            right_end = (cx + inset, cy, cz)
            tol = self.config.grasp_tolerance + _EPS
            if math.dist(lp, left_end) <= tol and math.dist(rp, right_end) <= tol:
                for tag, gp in (("left", lp), ("right", rp)):
                    arm = state.arms[tag]
                    arm.attached_object = o.id
                    arm.attach_offset = (cx - arm.pose.position[0], cy - arm.pose.position[1])
                    state.held_history.add((o.id, tag))
                self._sync_attachment(state, "left")
                return o.id
        return None

    def release(self, state: SceneState, tag: str) -> tuple[str | None, float]:
        """Detach; if no holder remains, the object settles. Returns
        (object id, drop distance)."""
        arm = state.arms[tag]
        obj_id = arm.attached_object
        if obj_id is None:
            return None, 0.0
        arm.attached_object = None
        arm.attach_offset = (0.0, 0.0)
        obj = state.object(obj_id)
        drop = 0.0
        if obj is not None and not state.holder_arms(obj_id):
            drop = self.settle(state, obj)
        return obj_id, drop

    # -- conflicts ---------------------------------------------------------

    def check_conflicts(self, state: SceneState) -> list[SimEvent]:
        events = []
        lp = state.arms["left"].pose.position
        rp = state.arms["right"].pose.position
        if math.dist(lp, rp) < 2.0 * self.config.r_ee:
            events.append(SimEvent("collision_arm_arm", state.step_index, "end-effectors intersect"))
        la, ra = state.arms["left"].attached_object, state.arms["right"].attached_object
        if la is not None and la == ra:
            obj = state.object(la)
            if obj is not None and not obj.dual_grasp:
                events.append(SimEvent("collision_arm_arm", state.step_index, f"both arms hold {la}"))
        return events

    # -- motion ------------------------------------------------------------

    def _clip_reach(self, tag: str, target: tuple[float, float, float],
                    events: list[SimEvent], step: int) -> tuple[float, float, float]:
        arm_cfg = ARMS[tag]
        if reachable(arm_cfg, target):
            return target
        bx, by, _ = arm_cfg.base_origin.position
        dx, dy = target[0] - bx, target[1] - by
        d = math.hypot(dx, dy)
        scale = arm_cfg.reach_radius / d
        events.append(SimEvent("unreachable_target", step, f"{tag} target clipped to reach boundary"))
        return (bx + dx * scale, by + dy * scale, target[2])

    def _apply_z_clamp(self, state: SceneState, tag: str, pos: tuple[float, float, float],
                       events: list[SimEvent], clamped: set, step: int) -> tuple[float, float, float]:
        z_min, detail = self._min_gripper_z(state, tag, (pos[0], pos[1]))
        if pos[2] < z_min - _EPS:
            key = (tag, detail)
            if key not in clamped:
                kind = "collision_table" if detail == "table" else "collision_object"
                events.append(SimEvent(kind, step, f"{tag} gripper stopped at {detail}"))
                clamped.add(key)
            return (pos[0], pos[1], z_min)
        return pos

    def move_arm_to(self, state: SceneState, tag: str, position: tuple[float, float, float],
                    orientation: Quaternion | None = None) -> list[SimEvent]:
        """Direct (planner-abstracted) move with reach and contact clamping.

        Mutates state in place; used by the high-level skill layer.
        """
        events: list[SimEvent] = []
        step = state.step_index
        clamped: set = set()
        target = self._clip_reach(tag, position, events, step)
        target = self._apply_z_clamp(state, tag, target, events, clamped, step)
        arm = state.arms[tag]
        quat = orientation or arm.pose.orientation
        arm.pose = Pose(target, quat)
        self._sync_attachment(state, tag)
        events.extend(self.check_conflicts(state))
        return events

    def set_gripper(self, state: SceneState, tag: str, value: float) -> list[SimEvent]:
        """Set gripper opening, attaching/releasing across the threshold."""
        events: list[SimEvent] = []
        arm = state.arms[tag]
        before = arm.gripper
        value = min(1.0, max(0.0, value))
        arm.gripper = value
        thr = self.config.close_threshold
        step = state.step_index
        if before >= thr and value < thr and arm.attached_object is None:
            got = self.try_attach(state, tag)
            if got is None:
                events.append(SimEvent("grasp_miss", step, f"{tag} closed on nothing"))
            else:
                events.append(SimEvent("grasp_success", step, f"{tag} grasped {got}"))
        elif before < thr and value >= thr and arm.attached_object is not None:
            obj_id, drop = self.release(state, tag)
            events.append(SimEvent("release", step, f"{tag} released {obj_id} drop={drop:.3f}"))
        return events

    def step_low_level(self, state: SceneState, action: LowLevelAction) -> list[SimEvent]:
        """Drive both arms toward the commanded action over substeps.

        Mutates state in place and returns the events emitted. The caller
        owns the step counter.
        """
        cfg = self.config
        lim = cfg.limits
        events: list[SimEvent] = []
        clamped: set = set()
        step = state.step_index

        targets = {}
        for tag, pose in (("left", action.left), ("right", action.right)):
            pos = self._clip_reach(tag, pose.position, events, step)
            targets[tag] = (pos, pose.orientation)
        grip_start = {tag: state.arms[tag].gripper for tag in ("left", "right")}
        grip_end = {"left": action.left_gripper, "right": action.right_gripper}

        n = lim.substeps_per_action
        for i in range(1, n + 1):
            for tag in ("left", "right"):
                arm = state.arms[tag]
                cur = arm.pose.position
                tgt, tquat = targets[tag]
                dx, dy, dz = tgt[0] - cur[0], tgt[1] - cur[1], tgt[2] - cur[2]
                dist = math.sqrt(dx * dx + dy * dy + dz * dz)
                if dist > lim.max_translation_per_substep:
                    s = lim.max_translation_per_substep / dist
                    new_pos = (cur[0] + dx * s, cur[1] + dy * s, cur[2] + dz * s)
                else:
                    new_pos = tgt
                new_pos = self._apply_z_clamp(state, tag, new_pos, events, clamped, step)
                ang = arm.pose.orientation.angle_to(tquat)
                if ang > lim.max_rotation_per_substep:
                    new_quat = slerp(arm.pose.orientation, tquat, lim.max_rotation_per_substep / ang)
                else:
                    new_quat = tquat
                arm.pose = Pose(new_pos, new_quat)
                arm.gripper = grip_start[tag] + (grip_end[tag] - grip_start[tag]) * (i / n)
                self._sync_attachment(state, tag)

        thr = cfg.close_threshold
        closing = [
            tag for tag in ("left", "right")
            if grip_start[tag] >= thr and grip_end[tag] < thr and state.arms[tag].attached_object is None
        ]
        if len(closing) == 2:
            dual = self._try_dual_attach(state)
            if dual is not None:
                events.append(SimEvent("grasp_success", step, f"both arms grasped {dual}"))
                closing = []
        for tag in closing:
            got = self.try_attach(state, tag)
            if got is None:
                events.append(SimEvent("grasp_miss", step, f"{tag} closed on nothing"))
            else:
                events.append(SimEvent("grasp_success", step, f"{tag} grasped {got}"))
        for tag in ("left", "right"):
            if grip_start[tag] < thr and grip_end[tag] >= thr and state.arms[tag].attached_object is not None:
                obj_id, drop = self.release(state, tag)
                events.append(SimEvent("release", step, f"{tag} released {obj_id} drop={drop:.3f}"))

        events.extend(self.check_conflicts(state))
        return events
