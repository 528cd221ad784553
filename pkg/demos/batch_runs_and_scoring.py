"""
Batch evaluation, resumable logs, and the score report
======================================================

Runs a small seeded batch into a log directory, re-runs it to show that
completed (task, seed) pairs are skipped, and prints the aggregate report.
The same thing is available from the command line:

    dualarm run --tasks handover_mic,grab_roller --episodes 5 --out runs/demo
    dualarm report --out runs/demo
"""

import tempfile

from dualarm.runner import RunConfig, load_logs, run_batch
from dualarm.scoring import format_report

out = tempfile.mkdtemp(prefix="dualarm-demo-")
cfg = RunConfig(tasks=("spatial_sparse", "handover_mic", "grab_roller"),
                episodes=5, parallel=4, out=out)

summary = run_batch(cfg)
print(format_report(summary))

# a second invocation finds every episode already on disk and adds nothing
before = sum(1 for _ in load_logs(out))
run_batch(cfg)
after = sum(1 for _ in load_logs(out))
print(f"\nresume check: {before} episodes before re-run, {after} after")
print("logs and summary live in", out)
