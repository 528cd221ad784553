import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from dualarm.errors import NonFinite, NonNormalizable, WrongArity
from dualarm.geometry import (LowLevelAction, Pose, Quaternion, decode_action,
                              encode_action, quat_rotate, slerp)


def quat_to_matrix(q: Quaternion) -> np.ndarray:
    x, y, z, w = q.x, q.y, q.z, q.w
    return np.array([
        [1 - 2 * (y * y + z * z), 2 * (x * y - z * w), 2 * (x * z + y * w)],
        [2 * (x * y + z * w), 1 - 2 * (x * x + z * z), 2 * (y * z - x * w)],
        [2 * (x * z - y * w), 2 * (y * z + x * w), 1 - 2 * (x * x + y * y)],
    ])


finite = st.floats(min_value=-10, max_value=10, allow_nan=False)
quat_components = st.tuples(finite, finite, finite, finite).filter(
    lambda t: math.sqrt(sum(v * v for v in t)) > 1e-3)


@given(quat_components, st.tuples(finite, finite, finite))
def test_rotation_matches_matrix_oracle(qc, v):
    q = Quaternion(*qc)
    got = np.array(quat_rotate(q, v))
    want = quat_to_matrix(q) @ np.array(v)
    assert np.allclose(got, want, atol=1e-9)


def test_z_90_maps_x_to_y():
    q = Quaternion(0.0, 0.0, 0.7071, 0.7071)
    rx = quat_rotate(q, (1.0, 0.0, 0.0))
    assert abs(rx[0]) < 1e-4 and abs(rx[1] - 1.0) < 1e-4 and abs(rx[2]) < 1e-4


def test_quaternion_is_normalized():
    q = Quaternion(0.0, 0.0, 2.0, 0.0)
    assert abs(q.z - 1.0) < 1e-12
    with pytest.raises(NonNormalizable):
        Quaternion(0.0, 0.0, 0.0, 0.0)


@given(quat_components, quat_components, st.floats(min_value=0, max_value=1))
def test_slerp_stays_normalized(qa, qb, t):
    a, b = Quaternion(*qa), Quaternion(*qb)
    s = slerp(a, b, t)
    n = math.sqrt(s.dot(s))
    assert abs(n - 1.0) < 1e-6


@given(quat_components, quat_components)
def test_slerp_endpoints(qa, qb):
    a, b = Quaternion(*qa), Quaternion(*qb)
    assert a.angle_to(slerp(a, b, 0.0)) < 1e-6
    assert b.angle_to(slerp(a, b, 1.0)) < 1e-6


def test_decode_layout():
    raw = [0.1, 0.2, 0.3, 0, 0, 0, 1, 0.5,
           -0.1, -0.2, 0.9, 0, 0, 0.7071, 0.7071, 1.0]
    a = decode_action(raw)
    assert a.left.position == (0.1, 0.2, 0.3)
    assert a.left_gripper == 0.5
    assert a.right.position == (-0.1, -0.2, 0.9)
    assert a.right_gripper == 1.0


def test_decode_rejects_bad_input():
    with pytest.raises(WrongArity):
        decode_action([0.0] * 15)
    with pytest.raises(NonFinite):
        decode_action([float("nan")] + [0.0] * 6 + [1.0] + [0.0] * 6 + [1.0, 1.0])
    with pytest.raises(NonNormalizable):
        decode_action([0, 0, 0, 0, 0, 0, 0, 1] + [0, 0, 0, 0, 0, 0, 1, 1])


def test_decode_clamps_gripper():
    raw = [0, 0, 0, 0, 0, 0, 1, 1.7, 0, 0, 0, 0, 0, 0, 1, -0.3]
    a = decode_action(raw)
    assert a.left_gripper == 1.0 and a.right_gripper == 0.0


@given(st.lists(st.floats(min_value=-2, max_value=2, allow_nan=False),
                min_size=16, max_size=16))
def test_codec_round_trip(vals):
    # make both quaternion slots valid unit quaternions
    vals[3:7] = [0.0, 0.0, 0.0, 1.0]
    vals[11:15] = [0.5, -0.5, 0.5, 0.5]
    vals[7] = min(1.0, max(0.0, vals[7]))
    vals[15] = min(1.0, max(0.0, vals[15]))
    assert encode_action(decode_action(vals)) == vals
