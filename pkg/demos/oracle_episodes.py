"""
One scripted episode per tier
=============================

Runs the oracle policy through a spatial-reasoning round, a high-level
planning task, and a low-level end-effector control task, printing the
round-by-round record the harness keeps for every episode.
"""

from dualarm.agents import OraclePolicy
from dualarm.runner import run_episode
from dualarm.tasks import get_task

for task_id in ("spatial_dense", "handover_block", "stack_blocks_two"):
    task = get_task(task_id)
    log = run_episode(task, seed=3, policy=OraclePolicy())
    print(f"\n{task_id} ({task.tier}), seed 3: success={log.success}, "
          f"score={log.score}")
    for rnd in log.rounds:
        executed = [a.action for a in rnd.actions]
        print(f"  round {rnd.round_index}: {len(executed)} actions executed, "
              f"{rnd.dropped} dropped by chunk truncation")
        for a in rnd.actions[:3]:
            print(f"    {a.action[:70]}... {a.feedback[:40]}"
                  if len(a.action) > 70 else f"    {a.action}  {a.feedback[:40]}")
