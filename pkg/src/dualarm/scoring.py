"""Scoring: the gaussian-weighted spatial score, success-rate aggregation
into report tables, and the rule-based error-label classifier.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

from .episode import EpisodeLog
from .errors import DuplicatePrediction, MissingPrediction
from .world import SceneState, ground_truth_arm

DEFAULT_SIGMA = 0.10

# subtype -> primary category
ERROR_CATEGORIES = {
    "env_grasp": "environmental",
    "env_randomization": "environmental",
    "state_estimation_misjudgment": "perceptual",
    "end_effector_allocation": "perceptual",
    "physical_attribute_misreasoning": "perceptual",
    "action_sequencing": "planning",
    "bimanual_conflict": "planning",
    "action_parameter_inconsistency": "planning",
    "format_error": "format",
}


@dataclass(frozen=True)
class SpatialScoreParams:
    sigma: float = DEFAULT_SIGMA

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError("sigma must be positive")


@dataclass(frozen=True)
class ErrorLabel:
    category: str
    subtype: str

    def __post_init__(self):
        assert ERROR_CATEGORIES.get(self.subtype) == self.category


def make_label(subtype: str) -> ErrorLabel:
    return ErrorLabel(ERROR_CATEGORIES[subtype], subtype)


@dataclass
class EpisodeScore:
    task_id: str
    seed: int
    tier: str
    success: bool
    score: float
    error_labels: list[ErrorLabel] = field(default_factory=list)


def object_score(x_pos: float, correct: bool, params: SpatialScoreParams) -> float:
    """Per-object score: 100 for a correct arm, otherwise a gaussian falloff
    in the object's distance from the x = 0 center line."""
    if correct:
        return 100.0
    d = abs(x_pos)
    return 100.0 * math.exp(-(d * d) / (2.0 * params.sigma * params.sigma))


def spatial_score(predictions, scene: SceneState,
                  params: SpatialScoreParams = SpatialScoreParams()) -> float:
    """Mean per-object score over the scene's target objects.

    predictions: iterable of (object id, arm) pairs; every target must appear
    exactly once.
    """
    by_object: dict[str, str] = {}
    for obj, arm in predictions:
        if obj in by_object:
            raise DuplicatePrediction(obj)
        by_object[obj] = arm
    total = 0.0
    targets = scene.targets
    if not targets:
        return 0.0
    for oid in targets:
        if oid not in by_object:
            raise MissingPrediction(oid)
        o = scene.object(oid)
        correct = by_object[oid] == ground_truth_arm(o)
        total += object_score(o.pose.position[0], correct, params)
    return total / len(targets)


# ---------------------------------------------------------------------------
# error classifier

def classify_errors(log: EpisodeLog) -> list[ErrorLabel]:
    """Rule-based labels from hard evidence in the log; ambiguous failures
    get no label. The multiset is deduplicated per subtype."""
    subtypes: list[str] = []

    def add(subtype: str) -> None:
        if subtype not in subtypes:
            subtypes.append(subtype)

    if log.placement_failure:
        add("env_randomization")
    for r in log.rounds:
        if r.parse_failure in ("malformed_structure", "missing_field", "wrong_arity"):
            add("format_error")
        elif r.parse_failure in ("unknown_action", "bad_parameter"):
            add("action_parameter_inconsistency")
        for a in r.actions:
            if a.guard_truncated:
                add("end_effector_allocation")
            if a.schema_error:
                add("action_parameter_inconsistency")
            if a.failure_kind in ("place_without_hold", "release_mid_air"):
                add("action_sequencing")
            for e in a.events:
                kind = e.get("kind", "")
                if kind == "collision_arm_arm":
                    add("bimanual_conflict")
                elif kind == "regrasp_satisfied":
                    add("state_estimation_misjudgment")
                elif kind == "size_order_violation":
                    add("physical_attribute_misreasoning")
                elif kind == "env_grasp":
                    add("env_grasp")
    return [make_label(s) for s in subtypes]


# ---------------------------------------------------------------------------
# aggregation

_SPATIAL_ORDER = ("spatial_sparse", "spatial_dense", "spatial_cluttered")


def _mean(values) -> float:
    values = list(values)
    return sum(values) / len(values) if values else 0.0


def aggregate(scores: list[EpisodeScore], sigma: float = DEFAULT_SIGMA) -> dict:
    """Summary record: per-task means, spatial-setting means with a macro
    average, coordination-group means and the overall manipulation average."""
    from .tasks import get_registry

    registry = get_registry()
    by_task: dict[str, list[EpisodeScore]] = {}
    for s in scores:
        by_task.setdefault(s.task_id, []).append(s)

    tasks = {}
    for task_id in sorted(by_task):
        eps = by_task[task_id]
        tasks[task_id] = {
            "episodes": len(eps),
            "success_rate": 100.0 * sum(1 for e in eps if e.success) / len(eps),
            "mean_score": _mean(e.score for e in eps),
        }

    spatial_settings = {t: tasks[t]["mean_score"] for t in _SPATIAL_ORDER if t in tasks}
    spatial_avg = _mean(spatial_settings.values())  # macro: mean of setting means

    groups: dict[str, list[float]] = {}
    manipulation = []
    for task_id, entry in tasks.items():
        spec = registry.get(task_id)
        if spec is None or spec.tier == "spatial":
            continue
        manipulation.append(entry["success_rate"])
        groups.setdefault(spec.coordination, []).append(entry["success_rate"])

    return {
        "sigma": sigma,
        "tasks": tasks,
        "spatial": {"settings": spatial_settings, "average": spatial_avg},
        "groups": {g: _mean(v) for g, v in sorted(groups.items())},
        "manipulation_average": _mean(manipulation),
    }


def format_report(summary: dict) -> str:
    """Aligned plain-text tables for a summary record."""
    from .tasks import get_registry

    registry = get_registry()
    lines = [f"sigma = {summary['sigma']}"]
    if summary["spatial"]["settings"]:
        lines.append("")
        lines.append("Spatial reasoning (mean score)")
        lines.append(f"  {'setting':<20}{'score':>8}")
        for t, v in summary["spatial"]["settings"].items():
            lines.append(f"  {t:<20}{v:>8.2f}")
        lines.append(f"  {'Avg.':<20}{summary['spatial']['average']:>8.2f}")
    manip = {t: e for t, e in summary["tasks"].items()
             if t in registry and registry[t].tier != "spatial"}
    if manip:
        lines.append("")
        lines.append("Manipulation (success rate %)")
        lines.append(f"  {'task':<26}{'code':<10}{'n':>4}{'SR':>8}")
        for t, e in manip.items():
            code = registry[t].code
            lines.append(f"  {t:<26}{code:<10}{e['episodes']:>4}{e['success_rate']:>8.2f}")
        for g, v in summary["groups"].items():
            lines.append(f"  {'Avg. ' + g:<40}{v:>8.2f}")
        lines.append(f"  {'Total Avg.':<40}{summary['manipulation_average']:>8.2f}")
    return "\n".join(lines) + "\n"
