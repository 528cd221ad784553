"""Command line entry point.

Verbs: run a batch, verify the harness with the scripted oracle, replay a
log directory to re-score it, and report to re-aggregate a summary.
"""
from __future__ import annotations

import argparse
import json
import sys

from . import scoring
from .runner import RunConfig, load_logs, run_batch, summarize, verify
from .tasks import get_registry


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--tasks", nargs="*", default=[],
                   help="task ids to include (default: all registered)")
    p.add_argument("--episodes", type=int, default=100,
                   help="episodes per task")
    p.add_argument("--seed-base", type=int, default=0,
                   help="first seed; episode i uses seed-base + i")
    p.add_argument("--backend", default="oracle",
                   choices=("oracle", "random", "remote"),
                   help="policy backend")
    p.add_argument("--sigma", type=float, default=scoring.DEFAULT_SIGMA,
                   help="spatial score falloff width in meters")
    p.add_argument("--parallel", type=int, default=1,
                   help="concurrent episodes")
    p.add_argument("--out", default=None,
                   help="output directory for logs and summary")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dualarm",
        description="Deterministic dual-arm manipulation evaluation harness.")
    sub = parser.add_subparsers(dest="verb", required=True)

    p_run = sub.add_parser("run", help="run a batch of episodes")
    _add_common(p_run)
    p_run.add_argument("--observe", action="store_true",
                       help="render observation images each round")
    p_run.add_argument("--endpoint", default=None,
                       help="remote backend: chat-completions URL")
    p_run.add_argument("--model", default=None,
                       help="remote backend: model name")
    p_run.add_argument("--credential-env", default="MODEL_API_KEY",
                       help="remote backend: env var holding the API key")

    p_verify = sub.add_parser("verify", help="oracle self-check on all tasks")
    _add_common(p_verify)

    p_replay = sub.add_parser("replay", help="re-score an existing log directory")
    _add_common(p_replay)

    p_report = sub.add_parser("report", help="re-aggregate logs into a report")
    _add_common(p_report)

    p_list = sub.add_parser("tasks", help="list registered tasks")
    return parser


def _backend_options(args) -> dict:
    if args.backend != "remote":
        return {}
    if not args.endpoint or not args.model:
        raise SystemExit("remote backend needs --endpoint and --model")
    return {"endpoint": args.endpoint, "model": args.model,
            "credential_env": args.credential_env}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)

    if args.verb == "tasks":
        for task in get_registry().values():
            print(f"{task.id:26s} {task.code:8s} {task.tier:11s} {task.coordination}")
        return 0

    if args.verb == "run":
        cfg = RunConfig(tasks=args.tasks, episodes=args.episodes,
                        seed_base=args.seed_base, backend=args.backend,
                        sigma=args.sigma, parallel=args.parallel,
                        out=args.out, observe=args.observe,
                        backend_options=_backend_options(args))
        summary = run_batch(cfg)
        print(scoring.format_report(summary))
        return 0

    if args.verb == "verify":
        summary = verify(episodes=args.episodes, seed_base=args.seed_base,
                         parallel=args.parallel, sigma=args.sigma,
                         tasks=args.tasks or None)
        print(scoring.format_report(summary))
        ok = True
        for task_id, row in summary["tasks"].items():
            if task_id.startswith("spatial_"):
                if row["mean_score"] < 100.0 - 1e-9:
                    ok = False
            elif row["success_rate"] < 0.95:
                ok = False
        print("verify: PASS" if ok else "verify: FAIL")
        return 0 if ok else 1

    if args.verb in ("replay", "report"):
        if not args.out:
            raise SystemExit(f"{args.verb} needs --out pointing at a log directory")
        logs = load_logs(args.out, args.tasks or None)
        if args.tasks:
            logs = [l for l in logs if l.task_id in args.tasks]
        summary = summarize(logs, args.sigma)
        print(scoring.format_report(summary))
        if args.verb == "report":
            print(json.dumps(summary, sort_keys=True, indent=2))
        return 0

    return 2


if __name__ == "__main__":
    sys.exit(main())
