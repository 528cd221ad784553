"""Pose and quaternion math plus the 16-dimensional action codec.

Quaternions are stored in (x, y, z, w) order and kept normalized. The raw
16-vector wire layout is, per arm: xyz position, quaternion (qx, qy, qz, qw),
gripper opening in [0, 1]; left arm first, right arm second.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import NonFinite, NonNormalizable, WrongArity

NORM_EPS = 1e-6


@dataclass(frozen=True)
class Quaternion:
    x: float
    y: float
    z: float
    w: float

    def __post_init__(self):
        n = math.sqrt(self.x * self.x + self.y * self.y + self.z * self.z + self.w * self.w)
        if n < NORM_EPS:
            raise NonNormalizable(f"quaternion norm {n} too small")
        if abs(n - 1.0) > 1e-12:
            object.__setattr__(self, "x", self.x / n)
            object.__setattr__(self, "y", self.y / n)
            object.__setattr__(self, "z", self.z / n)
            object.__setattr__(self, "w", self.w / n)

    @staticmethod
    def identity() -> "Quaternion":
        return Quaternion(0.0, 0.0, 0.0, 1.0)

    def conjugate(self) -> "Quaternion":
        return Quaternion(-self.x, -self.y, -self.z, self.w)

    def multiply(self, other: "Quaternion") -> "Quaternion":
        ax, ay, az, aw = self.x, self.y, self.z, self.w
        bx, by, bz, bw = other.x, other.y, other.z, other.w
        return Quaternion(
            aw * bx + ax * bw + ay * bz - az * by,
            aw * by - ax * bz + ay * bw + az * bx,
            aw * bz + ax * by - ay * bx + az * bw,
            aw * bw - ax * bx - ay * by - az * bz,
        )

    def dot(self, other: "Quaternion") -> float:
        return self.x * other.x + self.y * other.y + self.z * other.z + self.w * other.w

    def angle_to(self, other: "Quaternion") -> float:
        """Shortest rotation angle (radians) from self to other."""
        d = min(1.0, abs(self.dot(other)))
        return 2.0 * math.acos(d)

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.x, self.y, self.z, self.w)


def quat_rotate(q: Quaternion, v: tuple[float, float, float]) -> tuple[float, float, float]:
    """Rotate vector v by quaternion q (right-handed convention)."""
    # v' = v + 2 * q.w * (qv x v) + 2 * (qv x (qv x v))
    tx = 2.0 * (q.y * v[2] - q.z * v[1])
    ty = 2.0 * (q.z * v[0] - q.x * v[2])
    tz = 2.0 * (q.x * v[1] - q.y * v[0])
    return (
        v[0] + q.w * tx + (q.y * tz - q.z * ty),
        v[1] + q.w * ty + (q.z * tx - q.x * tz),
        v[2] + q.w * tz + (q.x * ty - q.y * tx),
    )


def slerp(a: Quaternion, b: Quaternion, t: float) -> Quaternion:
    """Shortest-arc spherical interpolation between two unit quaternions."""
    d = a.dot(b)
    bx, by, bz, bw = b.as_tuple()
    if d < 0.0:
        d, bx, by, bz, bw = -d, -bx, -by, -bz, -bw
    if d > 1.0 - 1e-12:
        return Quaternion(
            a.x + t * (bx - a.x),
            a.y + t * (by - a.y),
            a.z + t * (bz - a.z),
            a.w + t * (bw - a.w),
        )
    theta = math.acos(min(1.0, d))
    s = math.sin(theta)
    fa = math.sin((1.0 - t) * theta) / s
    fb = math.sin(t * theta) / s
    return Quaternion(fa * a.x + fb * bx, fa * a.y + fb * by, fa * a.z + fb * bz, fa * a.w + fb * bw)


@dataclass(frozen=True)
class Pose:
    position: tuple[float, float, float]
    orientation: Quaternion

    @staticmethod
    def from_xyz_quat(x, y, z, qx, qy, qz, qw) -> "Pose":
        return Pose((float(x), float(y), float(z)), Quaternion(float(qx), float(qy), float(qz), float(qw)))

    def with_position(self, position: tuple[float, float, float]) -> "Pose":
        return Pose(position, self.orientation)


@dataclass(frozen=True)
class Aabb:
    min: tuple[float, float, float]
    max: tuple[float, float, float]

    def __post_init__(self):
        for lo, hi in zip(self.min, self.max):
            if lo > hi:
                raise ValueError("Aabb min must be <= max componentwise")

    def overlaps(self, other: "Aabb") -> bool:
        return all(self.min[i] < other.max[i] and other.min[i] < self.max[i] for i in range(3))


@dataclass(frozen=True)
class LowLevelAction:
    left: Pose
    left_gripper: float
    right: Pose
    right_gripper: float


def _clamp01(v: float) -> float:
    return 0.0 if v < 0.0 else 1.0 if v > 1.0 else v


def decode_action(raw) -> LowLevelAction:
    """Decode a 16-real wire vector into a dual-arm action.

    Layout: [left xyz, left qxqyqzqw, left gripper, right xyz, right
    qxqyqzqw, right gripper]. Quaternions are renormalized; near-zero
    quaternions are rejected rather than silently replaced. Grippers are
    clamped to [0, 1].
    """
    vals = list(raw)
    if len(vals) != 16:
        raise WrongArity(f"expected 16 values, got {len(vals)}")
    fv = []
    for v in vals:
        f = float(v)
        if not math.isfinite(f):
            raise NonFinite(f"non-finite component {v!r}")
        fv.append(f)
    left = Pose.from_xyz_quat(*fv[0:7])
    right = Pose.from_xyz_quat(*fv[8:15])
    return LowLevelAction(left, _clamp01(fv[7]), right, _clamp01(fv[15]))


def encode_action(a: LowLevelAction) -> list[float]:
    """Exact layout inverse of decode_action."""
    lp, lq = a.left.position, a.left.orientation
    rp, rq = a.right.position, a.right.orientation
    return [
        lp[0], lp[1], lp[2], lq.x, lq.y, lq.z, lq.w, a.left_gripper,
        rp[0], rp[1], rp[2], rq.x, rq.y, rq.z, rq.w, a.right_gripper,
    ]
