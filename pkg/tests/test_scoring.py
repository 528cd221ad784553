import math

import pytest
from hypothesis import given, strategies as st

from dualarm.episode import ActionRecord, EpisodeLog, RoundRecord
from dualarm.errors import DuplicatePrediction, MissingPrediction
from dualarm.scoring import (DEFAULT_SIGMA, ERROR_CATEGORIES, EpisodeScore,
                             SpatialScoreParams, aggregate, classify_errors,
                             format_report, make_label, object_score,
                             spatial_score)
from dualarm.world import generate_scene, ground_truth_arm


def test_sigma_default():
    assert DEFAULT_SIGMA == 0.10
    with pytest.raises(ValueError):
        SpatialScoreParams(0.0)


def test_correct_always_100():
    params = SpatialScoreParams()
    for x in (-0.4, -0.01, 0.0, 0.3):
        assert object_score(x, True, params) == 100.0


def test_wrong_arm_gaussian():
    params = SpatialScoreParams(0.1)
    assert object_score(0.0, False, params) == 100.0
    assert object_score(0.1, False, params) == pytest.approx(100.0 * math.exp(-0.5))
    assert object_score(-0.1, False, params) == object_score(0.1, False, params)
    assert object_score(0.3, False, params) < 1.2


@given(st.floats(min_value=-0.5, max_value=0.5),
       st.floats(min_value=0.01, max_value=1.0))
def test_wrong_never_beats_correct(x, sigma):
    params = SpatialScoreParams(sigma)
    assert object_score(x, False, params) <= 100.0


def test_spatial_score_mean_and_validation():
    scene = generate_scene("spatial_sparse", 4)
    truth = [(oid, ground_truth_arm(scene.object(oid))) for oid in scene.targets]
    assert spatial_score(truth, scene) == 100.0
    flipped = [(o, "left" if a == "right" else "right") for o, a in truth]
    assert spatial_score(flipped, scene) < 100.0
    with pytest.raises(DuplicatePrediction):
        spatial_score(truth + truth[:1], scene)
    with pytest.raises(MissingPrediction):
        spatial_score(truth[:-1], scene)


def test_error_taxonomy_structure():
    assert set(ERROR_CATEGORIES.values()) == {"environmental", "perceptual",
                                              "planning", "format"}
    assert ERROR_CATEGORIES["end_effector_allocation"] == "perceptual"
    assert ERROR_CATEGORIES["action_parameter_inconsistency"] == "planning"
    assert ERROR_CATEGORIES["env_grasp"] == "environmental"
    assert ERROR_CATEGORIES["format_error"] == "format"
    assert make_label("bimanual_conflict").category == "planning"


def base_log(**kw):
    return EpisodeLog(task_id="stack_blocks_two", tier="low_level", seed=0, **kw)


def test_classify_placement_failure():
    labels = classify_errors(base_log(placement_failure=True))
    assert [l.subtype for l in labels] == ["env_randomization"]


def test_classify_deduplicates():
    log = base_log()
    log.rounds = [RoundRecord(0, "", parse_failure="malformed_structure"),
                  RoundRecord(1, "", parse_failure="wrong_arity")]
    labels = classify_errors(log)
    assert [l.subtype for l in labels] == ["format_error"]


def test_classify_event_kinds():
    log = base_log()
    rec = ActionRecord(0, "x", "ok", "Action succeeded.",
                       events=[{"kind": "collision_arm_arm"},
                               {"kind": "regrasp_satisfied"}])
    log.rounds = [RoundRecord(0, "{}", actions=[rec])]
    subtypes = {l.subtype for l in classify_errors(log)}
    assert subtypes == {"bimanual_conflict", "state_estimation_misjudgment"}


def test_aggregate_and_report():
    scores = [EpisodeScore("spatial_sparse", s, "spatial", True, 100.0, [])
              for s in range(4)]
    scores += [EpisodeScore("stack_blocks_two", s, "low_level", s % 2 == 0,
                            100.0 * (s % 2 == 0), []) for s in range(4)]
    summary = aggregate(scores)
    assert summary["spatial"]["settings"]["spatial_sparse"] == 100.0
    assert summary["tasks"]["stack_blocks_two"]["success_rate"] == 50.0
    report = format_report(summary)
    assert "stack_blocks_two" in report and "100.00" in report


def test_aggregate_order_invariant():
    scores = [EpisodeScore("stack_blocks_two", s, "low_level", s < 3,
                           100.0 * (s < 3), []) for s in range(10)]
    assert aggregate(scores) == aggregate(list(reversed(scores)))
