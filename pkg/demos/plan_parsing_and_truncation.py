"""
Parsing model output, chunk truncation, and history
===================================================

Model text is untrusted: the parser never raises, returning either a plan
record or a typed failure. Accepted plans are cut to the task's chunk size
before execution, and executed rounds feed a rolling three-step history
that is included in the next prompt.
"""

import json

from dualarm.protocol import (HistoryWindow, ParseFailure, parse_plan,
                              truncate_chunk)

good = json.dumps({
    "visual_state_description": "a red block left of center, a pad on the right",
    "reasoning_and_reflection": "the block is at x<0 so the left arm takes it",
    "language_plan": "pick up the block with the left arm and lift it",
    "executable_plan": [
        {"action_name": "grasp_actor",
         "parameters": {"actor": "block", "arm_tag": "left"}},
        {"action_name": "move_by_displacement",
         "parameters": {"arm_tag": "left", "z": 0.1}},
        {"action_name": "back_to_origin", "parameters": {"arm_tag": "left"}},
    ],
})

plan = parse_plan(good, "high_level")
print("parsed", len(plan.executable_plan), "actions")

# only the first k actions of a chunk execute before the agent re-observes
prefix, dropped = truncate_chunk(plan, k=2)
print(f"chunk of {len(plan.executable_plan)} truncated to {len(prefix)}, "
      f"{dropped} deferred to the next round")

# malformed text comes back as a typed failure, never an exception
for raw in ("not json at all", '{"executable_plan": "grasp the block"}'):
    result = parse_plan(raw, "high_level")
    assert isinstance(result, ParseFailure)
    print(f"rejected ({result.kind}): {raw[:40]}")

# the rolling history the next prompt will carry
history = HistoryWindow()
history.record(["grasp_actor(block, left)"], ["Action succeeded."])
history.record(["move_by_displacement(left, z=0.1)"], ["Action succeeded."])
print()
print(history.render())
