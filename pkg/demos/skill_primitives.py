"""
High-level skill primitives and the allocation guard
====================================================

Drives a pick-and-place with the parameterized skills and shows what
happens when a plan asks an arm to reach across the table: the guard
refuses with a fixed feedback string and leaves the world untouched.
"""

from dualarm.simulator import Simulator
from dualarm.skills import allocation_guard, execute_skill, validate_call
from dualarm.world import empty_scene, place_objects, scene_rng

state = empty_scene(seed=0, task_id="demo")
place_objects(state, [
    {"id": "green_block", "kind": "cube", "half_extents": (0.025,) * 3,
     "x": -0.20, "y": 0.0},
    {"id": "far_block", "kind": "cube", "half_extents": (0.025,) * 3,
     "x": -0.34, "y": 0.0},
], scene_rng("demo", 0))
sim = Simulator()


def do(name, **params):
    call = validate_call({"action_name": name, "parameters": params})
    out = execute_skill(sim, state, call)
    print(f"{name:22s} -> {out.feedback}")
    return out


# a normal left-arm pick, lift, and set-down
do("grasp_actor", actor="green_block", arm_tag="left", pre_grasp_dis=0.09)
do("move_by_displacement", arm_tag="left", z=0.12)
do("place_actor", actor="green_block", arm_tag="left",
   target_pose=[-0.05, -0.1, 0.74], pre_dis=0.09, dis=0.02)
do("back_to_origin", arm_tag="left")

p = state.object("green_block").pose.position
print(f"block landed at ({p[0]:+.3f}, {p[1]:+.3f}, {p[2]:.3f})")

# the right arm cannot reach the far-left block; the guard says so
bad = validate_call({"action_name": "grasp_actor",
                     "parameters": {"actor": "far_block", "arm_tag": "right"}})
print(allocation_guard(state, bad))
