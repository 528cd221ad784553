"""Episode logs: per-action records, per-round records, and the episode
envelope shared by the runner and the scorer.

Logs serialize to JSON with a stable field order. Timestamps are carried for
humans but excluded from the content hash so reruns compare byte-equal.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field


@dataclass
class ActionRecord:
    index: int  # position within the executed chunk
    action: dict | str  # skill call record or vector text
    status: str  # "ok" | "failed" | "skipped"
    feedback: str
    guard_truncated: bool = False  # stopped by the reach guard
    schema_error: str = ""  # parse/validation failure kind, if any
    failure_kind: str = ""  # simulator failure detail, if any
    events: list[dict] = field(default_factory=list)


@dataclass
class RoundRecord:
    round_index: int
    raw_output: str
    prompt_hash: str = ""
    parse_failure: str = ""  # ParseFailure kind or empty
    parse_detail: str = ""
    plan_length: int = 0
    executed: int = 0
    dropped: int = 0
    actions: list[ActionRecord] = field(default_factory=list)
    feedback_lines: list[str] = field(default_factory=list)


@dataclass
class EpisodeLog:
    task_id: str
    tier: str
    seed: int
    config_hash: str = ""
    sigma: float = 0.1
    success: bool = False
    score: float = 0.0
    rounds: list[RoundRecord] = field(default_factory=list)
    predictions: list[list[str]] = field(default_factory=list)  # spatial tier
    ground_truth: dict[str, str] = field(default_factory=dict)  # spatial tier
    target_xs: dict[str, float] = field(default_factory=dict)  # spatial tier
    initial_scene_hash: str = ""
    final_scene_hash: str = ""
    placement_failure: bool = False
    timestamp: str = ""

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)

    def content_hash(self) -> str:
        record = asdict(self)
        record.pop("timestamp", None)
        text = json.dumps(record, sort_keys=True)
        return hashlib.sha256(text.encode()).hexdigest()


def episode_from_json(text: str) -> EpisodeLog:
    raw = json.loads(text)
    rounds = []
    for r in raw.get("rounds", ()):
        actions = [ActionRecord(**a) for a in r.pop("actions", ())]
        rounds.append(RoundRecord(actions=actions, **r))
    raw["rounds"] = rounds
    raw["predictions"] = [list(p) for p in raw.get("predictions", ())]
    return EpisodeLog(**raw)
