"""Agent wire protocol: prompt assembly, plan parsing, chunk truncation, and
the 3-step feedback history window.

Plans arrive as a single structured record with four named fields. The parser
is total: any byte string yields either a PlanRecord or a typed ParseFailure.
"""
from __future__ import annotations

import ast
import json
import math
import re
from collections import deque
from dataclasses import dataclass, field

from . import skills
from .tasks import TaskSpec, assistant_info
from .world import SceneState

FEEDBACK_OK = "Action succeeded."
FEEDBACK_FAIL = "Action failed: {detail}"
FEEDBACK_SKIPPED = "Action skipped."

PARSE_FAILURE_KINDS = (
    "malformed_structure", "missing_field", "wrong_arity", "unknown_action", "bad_parameter",
)

_PLAN_FIELDS = ("visual_state_description", "reasoning_and_reflection",
                "language_plan", "executable_plan")

# plain decimal or scientific float literal; arithmetic expressions are rejected
_NUM_RE = re.compile(r"^[+-]?(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?$")


@dataclass(frozen=True)
class ParseFailure:
    kind: str
    detail: str = ""

    def __post_init__(self):
        assert self.kind in PARSE_FAILURE_KINDS


@dataclass(frozen=True)
class PlanRecord:
    tier: str
    visual_state_description: str = ""
    reasoning_and_reflection: str = ""
    language_plan: str = ""
    executable_plan: tuple = ()
    # results only populated for the spatial tier
    results: tuple = ()
    lenient: bool = False  # a fence was stripped or non-strict parsing was used


@dataclass
class HistoryStep:
    index: int
    actions: list  # executed chunk: dicts (high level) or vector strings (low level)
    feedback: list  # one feedback line per executed action


class HistoryWindow:
    """The three most recent (chunk, feedback) pairs, oldest first."""

    def __init__(self, maxlen: int = 3):
        self._steps: deque[HistoryStep] = deque(maxlen=maxlen)
        self._count = 0

    def record(self, actions: list, feedback: list) -> None:
        self._steps.append(HistoryStep(self._count, list(actions), list(feedback)))
        self._count += 1

    def __len__(self) -> int:
        return len(self._steps)

    @property
    def steps(self) -> list[HistoryStep]:
        return list(self._steps)

    def render(self) -> str:
        if not self._steps:
            return ""
        blocks = []
        for s in self._steps:
            fb = "\n".join(s.feedback) if s.feedback else "(no actions executed)"
            blocks.append(f"Step {s.index}, actionList {s.actions!r}, action_feedback:{fb}")
        return "The 3-steps action history:\n" + "\n\n".join(blocks)


# ---------------------------------------------------------------------------
# prompt assembly

_SPATIAL_TEMPLATE = """You are a dual-arm robot manipulation assistant. Analyze the observation image and decide which arm (left or right) should perform the grasping action for each listed object.

Your output should be json format and clearly indicate:
visual_state_description (describe what you see) and results. results should be an array. Every item in the array is a json object which contains object and its use_arm (left or right).

Json format is strict. Do not include json code fences and do not output anything besides the JSON record."""

_HIGH_LEVEL_TEMPLATE = """You are a dual-arm robot that interacts with objects on a table by emitting skill calls. Do not let the two arms collide; return an arm to its origin when it is not needed.

The output json format should be {"visual_state_description": str, "reasoning_and_reflection": str, "language_plan": str, "executable_plan": list}.
executable_plan is a json array; every item is a json object with the action id (2.2 to 2.9), the action name, and the parameters for the action. The available actions are:

"""

_LOW_LEVEL_TEMPLATE = """You are a robot manipulation assistant controlling a dual-arm robot in End-Effector Pose Control mode.
The action format is:
[left_end_effector_pose (xyz + quaternion) + left_gripper + right_end_effector_pose (xyz + quaternion) + right_gripper]
The quaternion order is (qx, qy, qz, qw). The gripper range is [0, 1]: 0 = fully closed, 1 = fully open.
Every action is a 16-number vector written as plain decimals; arithmetic expressions are illegal.

The output json format should be {"visual_state_description": str, "reasoning_and_reflection": str, "language_plan": str, "executable_plan": list}.
executable_plan is a json array of 16-number action vectors, each written as a string."""


def assemble_prompt(task: TaskSpec, state: SceneState, history: HistoryWindow | None = None,
                    observations: list[str] | None = None) -> str:
    """Deterministic prompt document. The history block is omitted entirely
    when no steps have been recorded."""
    parts = []
    if task.tier == "spatial":
        parts.append(_SPATIAL_TEMPLATE)
    elif task.tier == "high_level":
        parts.append(_HIGH_LEVEL_TEMPLATE + json.dumps(skills.SKILL_SCHEMAS, indent=2))
    else:
        parts.append(_LOW_LEVEL_TEMPLATE)
    parts.append(f"The task name is {task.id}, the description and the goal of the task "
                 f"is as follows:\n{task.instruction}")
    parts.append("Assistant info (Very Important to provide some key info):\n"
                 + assistant_info(task, state))
    if history is not None:
        block = history.render()
        if block:
            parts.append(block)
    for i, ref in enumerate(observations or ()):
        parts.append(f"[Observation image {i + 1}: {ref}]")
    parts.append(f"Considering the above interaction history and the current image state, "
                 f"to achieve the human instruction: '{task.instruction}', you are supposed "
                 f"to output in json.")
    return "\n\n".join(parts)


# ---------------------------------------------------------------------------
# parsing

def _strip_fences(text: str) -> tuple[str, bool]:
    t = text.strip()
    m = re.match(r"^```[A-Za-z0-9_-]*\s*\n?(.*?)\n?\s*```$", t, re.DOTALL)
    if m:
        return m.group(1).strip(), True
    return t, False


def _quote_bare_words(text: str) -> str:
    # for the spatial tier's quote-free output style: wrap bare identifiers
    # in double quotes so the record becomes regular JSON
    out = re.sub(r"(?<![\"\w])([A-Za-z_][A-Za-z0-9_]*)(?![\"\w])", r'"\1"', text)
    return out


def _loads_lenient(text: str):
    """Parse a structured record, tolerating single quotes, python literals
    and bare identifiers. Returns (value, lenient_flag) or (None, flag)."""
    try:
        return json.loads(text), False
    except Exception:
        pass
    try:
        v = ast.literal_eval(text)
        return v, True
    except Exception:
        pass
    try:
        v = json.loads(_quote_bare_words(text))
        return v, True
    except Exception:
        return None, True


def parse_vector(entry) -> tuple[float, ...] | ParseFailure:
    """One 16-real low-level action, given as a bracketed string or a list."""
    if isinstance(entry, str):
        t = entry.strip()
        if t.startswith("[") and t.endswith("]"):
            t = t[1:-1]
        tokens = [tok.strip() for tok in t.split(",")] if t.strip() else []
        values = []
        for tok in tokens:
            if not _NUM_RE.match(tok):
                return ParseFailure("bad_parameter", f"not a plain decimal: {tok!r}")
            values.append(float(tok))
    elif isinstance(entry, (list, tuple)):
        values = []
        for v in entry:
            if isinstance(v, bool) or not isinstance(v, (int, float)):
                return ParseFailure("bad_parameter", f"not a number: {v!r}")
            values.append(float(v))
    else:
        return ParseFailure("bad_parameter", f"action vector must be a string or list, got {type(entry).__name__}")
    if len(values) != 16:
        return ParseFailure("wrong_arity", f"expected 16 numbers, got {len(values)}")
    if not all(math.isfinite(v) for v in values):
        return ParseFailure("bad_parameter", "non-finite value in action vector")
    return tuple(values)


def _parse_results(items) -> tuple | ParseFailure:
    if not isinstance(items, list):
        return ParseFailure("malformed_structure", "results must be an array")
    pairs = []
    for item in items:
        if not isinstance(item, dict):
            return ParseFailure("malformed_structure", "results entries must be objects")
        low = {str(k).lower(): v for k, v in item.items()}
        if "object" not in low or "use_arm" not in low:
            return ParseFailure("missing_field", "results entry needs object and use_arm")
        arm = str(low["use_arm"]).strip().lower()
        if arm not in ("left", "right"):
            return ParseFailure("bad_parameter", f"use_arm must be left or right, got {low['use_arm']!r}")
        pairs.append((str(low["object"]).strip(), arm))
    return tuple(pairs)


def parse_plan(raw: str, tier: str) -> PlanRecord | ParseFailure:
    """Total parser for a single agent output record."""
    if not isinstance(raw, str):
        return ParseFailure("malformed_structure", "raw output is not text")
    text, fenced = _strip_fences(raw)
    record, lenient = _loads_lenient(text)
    if not isinstance(record, dict):
        return ParseFailure("malformed_structure", "output is not a single json object")
    record = {str(k).strip().lower(): v for k, v in record.items()}

    if tier == "spatial":
        if "results" not in record:
            return ParseFailure("missing_field", "missing field 'results'")
        results = _parse_results(record["results"])
        if isinstance(results, ParseFailure):
            return results
        return PlanRecord(
            tier=tier,
            visual_state_description=str(record.get("visual_state_description", "")),
            results=results,
            lenient=fenced or lenient,
        )

    for name in _PLAN_FIELDS:
        if name not in record:
            return ParseFailure("missing_field", f"missing field {name!r}")
    plan = record["executable_plan"]
    if isinstance(plan, str):
        inner, extra_lenient = _loads_lenient(plan)
        if not isinstance(inner, list):
            return ParseFailure("malformed_structure", "executable_plan is not an array")
        plan = inner
        lenient = lenient or extra_lenient
    if not isinstance(plan, list):
        return ParseFailure("malformed_structure", "executable_plan is not an array")

    entries = []
    if tier == "high_level":
        for item in plan:
            if not isinstance(item, dict):
                return ParseFailure("malformed_structure", "skill call entries must be objects")
            try:
                entries.append(skills.validate_call(item))
            except skills.SchemaError as e:
                return ParseFailure(e.kind, str(e))
    elif tier == "low_level":
        for item in plan:
            vec = parse_vector(item)
            if isinstance(vec, ParseFailure):
                return vec
            entries.append(vec)
    else:
        return ParseFailure("malformed_structure", f"unknown tier {tier!r}")

    return PlanRecord(
        tier=tier,
        visual_state_description=str(record["visual_state_description"]),
        reasoning_and_reflection=str(record["reasoning_and_reflection"]),
        language_plan=str(record["language_plan"]),
        executable_plan=tuple(entries),
        lenient=fenced or lenient,
    )


def parse_spatial_results(raw: str, required: list[str] | None = None):
    """Arm assignments for the spatial tier. With `required`, every listed
    object must appear exactly once."""
    plan = parse_plan(raw, "spatial")
    if isinstance(plan, ParseFailure):
        return plan
    pairs = list(plan.results)
    seen = set()
    for obj, _ in pairs:
        if obj in seen:
            return ParseFailure("bad_parameter", f"duplicate object entry {obj!r}")
        seen.add(obj)
    if required is not None:
        missing = [t for t in required if t not in seen]
        if missing:
            return ParseFailure("missing_field", f"missing predictions for {missing}")
    return pairs


# ---------------------------------------------------------------------------
# chunking and rendering

def truncate_chunk(plan: PlanRecord, k: int) -> tuple[list, int]:
    """Executable prefix of length min(len, k) plus the dropped count."""
    if k < 1:
        raise ValueError("k must be >= 1")
    actions = list(plan.executable_plan)
    prefix = actions[:k]
    return prefix, len(actions) - len(prefix)


def skill_call_to_dict(call: skills.SkillCall) -> dict:
    return {
        "action_id": call.action_id,
        "action_name": call.action_name,
        "parameters": dict(call.parameters),
    }


def vector_to_text(vec) -> str:
    return "[" + ", ".join(repr(float(v)) for v in vec) + "]"


def render_plan(plan: PlanRecord) -> str:
    """Wire-format text for a PlanRecord; parse_plan(render_plan(p)) == p up
    to the leniency flag."""
    if plan.tier == "spatial":
        record = {
            "visual_state_description": plan.visual_state_description,
            "results": [{"object": o, "use_arm": a} for o, a in plan.results],
        }
        return json.dumps(record, indent=2)
    if plan.tier == "high_level":
        entries = [skill_call_to_dict(c) for c in plan.executable_plan]
    else:
        entries = [vector_to_text(v) for v in plan.executable_plan]
    record = {
        "visual_state_description": plan.visual_state_description,
        "reasoning_and_reflection": plan.reasoning_and_reflection,
        "language_plan": plan.language_plan,
        "executable_plan": entries,
    }
    return json.dumps(record, indent=2)
