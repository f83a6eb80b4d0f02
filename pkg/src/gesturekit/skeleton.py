"""3D hand skeleton model: 21 named joints, a fixed 20-bone tree, geometric
transforms, and per-frame feature extraction.

Joints follow the wrist-rooted layout: index 0 is the wrist (doubling as the
palm center), then four joints per finger from base to tip. The five
wrist-to-finger-base edges are the palm bones; the remaining 15 edges run
along the finger chains.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import IntEnum

import numpy as np

JOINT_COUNT = 21
BONE_COUNT = 20
PALM_BONE_COUNT = 5


class JointId(IntEnum):
    WRIST = 0
    THUMB_CMC = 1
    THUMB_MCP = 2
    THUMB_IP = 3
    THUMB_TIP = 4
    INDEX_MCP = 5
    INDEX_PIP = 6
    INDEX_DIP = 7
    INDEX_TIP = 8
    MIDDLE_MCP = 9
    MIDDLE_PIP = 10
    MIDDLE_DIP = 11
    MIDDLE_TIP = 12
    RING_MCP = 13
    RING_PIP = 14
    RING_DIP = 15
    RING_TIP = 16
    PINKY_MCP = 17
    PINKY_PIP = 18
    PINKY_DIP = 19
    PINKY_TIP = 20


#: Finger chains as (base, ..., tip) joint indices, thumb first.
FINGER_CHAINS = (
    (JointId.THUMB_CMC, JointId.THUMB_MCP, JointId.THUMB_IP, JointId.THUMB_TIP),
    (JointId.INDEX_MCP, JointId.INDEX_PIP, JointId.INDEX_DIP, JointId.INDEX_TIP),
    (JointId.MIDDLE_MCP, JointId.MIDDLE_PIP, JointId.MIDDLE_DIP, JointId.MIDDLE_TIP),
    (JointId.RING_MCP, JointId.RING_PIP, JointId.RING_DIP, JointId.RING_TIP),
    (JointId.PINKY_MCP, JointId.PINKY_PIP, JointId.PINKY_DIP, JointId.PINKY_TIP),
)


@dataclass(frozen=True)
class Bone:
    parent: JointId
    child: JointId
    palm_bone: bool


def _build_bones() -> tuple[Bone, ...]:
    palm = [Bone(JointId.WRIST, chain[0], True) for chain in FINGER_CHAINS]
    finger = [
        Bone(chain[i], chain[i + 1], False)
        for chain in FINGER_CHAINS
        for i in range(3)
    ]
    finger.sort(key=lambda b: b.child)
    return tuple(palm + finger)


#: The fixed 20-edge topology: palm bones first, then ascending child index.
BONES = _build_bones()

_BONE_PARENTS = np.array([int(b.parent) for b in BONES])
_BONE_CHILDREN = np.array([int(b.child) for b in BONES])
_PALM_CHILDREN = np.array([int(chain[0]) for chain in FINGER_CHAINS])


def bone_topology() -> list[Bone]:
    """The 20 bones of the hand, palm bones first, ascending child index."""
    return list(BONES)


@dataclass(frozen=True, eq=False)
class HandSkeleton:
    """Immutable 21-joint pose; `joints` is a read-only (21, 3) float array."""

    joints: np.ndarray

    def __post_init__(self):
        arr = np.array(self.joints, dtype=np.float64)
        if arr.shape != (JOINT_COUNT, 3):
            raise ValueError(f"joints must have shape (21, 3), got {arr.shape}")
        arr.flags.writeable = False
        object.__setattr__(self, "joints", arr)

    def __eq__(self, other):
        if not isinstance(other, HandSkeleton):
            return NotImplemented
        return np.array_equal(self.joints, other.joints)

    def __hash__(self):
        return hash(self.joints.tobytes())


@dataclass(frozen=True, eq=False)
class GestureFrame:
    """One timestamped skeleton observation with an optional gaze point."""

    t_ms: int
    skeleton: HandSkeleton
    gaze: np.ndarray | None = None

    def __post_init__(self):
        if self.t_ms < 0:
            raise ValueError(f"t_ms must be non-negative, got {self.t_ms}")
        if self.gaze is not None:
            g = np.array(self.gaze, dtype=np.float64)
            if g.shape != (2,):
                raise ValueError(f"gaze must be a 2-vector, got shape {g.shape}")
            if not np.isfinite(g).all():
                raise ValueError("gaze coordinates must be finite")
            g.flags.writeable = False
            object.__setattr__(self, "gaze", g)

    def __eq__(self, other):
        if not isinstance(other, GestureFrame):
            return NotImplemented
        if self.t_ms != other.t_ms or self.skeleton != other.skeleton:
            return False
        if (self.gaze is None) != (other.gaze is None):
            return False
        return self.gaze is None or np.array_equal(self.gaze, other.gaze)


@dataclass(frozen=True, eq=False)
class RigidTransform:
    """Similarity transform p -> scale * rotation @ p + translation."""

    rotation: np.ndarray
    translation: np.ndarray
    scale: float = 1.0

    def __post_init__(self):
        rot = np.array(self.rotation, dtype=np.float64)
        tr = np.array(self.translation, dtype=np.float64)
        if rot.shape != (3, 3):
            raise ValueError(f"rotation must be 3x3, got {rot.shape}")
        if tr.shape != (3,):
            raise ValueError(f"translation must be a 3-vector, got {tr.shape}")
        rot.flags.writeable = False
        tr.flags.writeable = False
        object.__setattr__(self, "rotation", rot)
        object.__setattr__(self, "translation", tr)
        object.__setattr__(self, "scale", float(self.scale))

    @classmethod
    def identity(cls) -> "RigidTransform":
        return cls(np.eye(3), np.zeros(3), 1.0)

    def violations(self) -> list[str]:
        out = []
        err = np.abs(self.rotation @ self.rotation.T - np.eye(3)).max()
        if not err < 1e-9:
            out.append(f"rotation not orthonormal (|R R^T - I| = {err:.3g})")
        det = np.linalg.det(self.rotation)
        if not abs(det - 1.0) < 1e-9:
            out.append(f"rotation determinant {det:.12g} != +1")
        if not self.scale > 0:
            out.append(f"scale {self.scale} not positive")
        return out

    def require_valid(self):
        bad = self.violations()
        if bad:
            raise ValueError("invalid transform: " + "; ".join(bad))

    def then(self, after: "RigidTransform") -> "RigidTransform":
        """The transform equal to applying self first, then `after`."""
        rot = after.rotation @ self.rotation
        tr = after.scale * (after.rotation @ self.translation) + after.translation
        return RigidTransform(rot, tr, after.scale * self.scale)

    def apply_points(self, points: np.ndarray) -> np.ndarray:
        return points @ (self.scale * self.rotation).T + self.translation

    def apply_xy(self, point_xy: np.ndarray) -> np.ndarray:
        """Restriction to the x-y plane: embed at z=0, transform, project."""
        p = np.array([point_xy[0], point_xy[1], 0.0])
        return self.apply_points(p)[:2]


def rotation_about(axis, angle: float) -> np.ndarray:
    """Rotation matrix for `angle` radians about the (unit) 3-vector `axis`."""
    a = np.asarray(axis, dtype=np.float64)
    norm = np.linalg.norm(a)
    if norm == 0:
        raise ValueError("rotation axis must be non-zero")
    x, y, z = a / norm
    k = np.array([[0.0, -z, y], [z, 0.0, -x], [-y, x, 0.0]])
    return np.eye(3) + np.sin(angle) * k + (1.0 - np.cos(angle)) * (k @ k)


@dataclass(frozen=True)
class ValidationResult:
    ok: bool
    violations: tuple[str, ...] = ()


def validate(skeleton: HandSkeleton) -> ValidationResult:
    """Check finiteness of all coordinates and positivity of all bone lengths.

    Violations are reported in the return value, never raised: a skeleton
    arriving off the wire may be arbitrarily bad and still needs a diagnosis.
    """
    finite = np.isfinite(skeleton.joints).all(axis=1)
    diffs = skeleton.joints[_BONE_CHILDREN] - skeleton.joints[_BONE_PARENTS]
    with np.errstate(invalid="ignore"):
        lengths = np.sqrt((diffs * diffs).sum(axis=1))
    if finite.all() and (lengths > 0.0).all():
        return ValidationResult(ok=True)
    problems: list[str] = []
    for idx in np.nonzero(~finite)[0]:
        problems.append(f"joint {JointId(idx).name}: non-finite coordinate")
    for i in range(BONE_COUNT):
        bone = BONES[i]
        if not (finite[int(bone.parent)] and finite[int(bone.child)]):
            continue  # already blamed on the joint
        if not lengths[i] > 0.0:
            problems.append(
                f"bone ({bone.parent.name}, {bone.child.name}): zero length"
            )
    return ValidationResult(ok=not problems, violations=tuple(problems))


def bone_lengths(skeleton: HandSkeleton) -> np.ndarray:
    """Euclidean length of each bone, in bone_topology() order."""
    diffs = skeleton.joints[_BONE_CHILDREN] - skeleton.joints[_BONE_PARENTS]
    lengths = np.sqrt((diffs * diffs).sum(axis=1))
    if not np.isfinite(lengths).all() or (lengths <= 0.0).any():
        raise ValueError(
            "invalid skeleton: " + "; ".join(validate(skeleton).violations)
        )
    return lengths


def mean_palm_bone_length(skeleton: HandSkeleton) -> float:
    """Mean length of the five wrist-to-finger-base bones (the size unit)."""
    diffs = skeleton.joints[_PALM_CHILDREN] - skeleton.joints[0]
    return float(np.sqrt((diffs * diffs).sum(axis=1)).mean())


def apply_transform(skeleton: HandSkeleton, xf: RigidTransform) -> HandSkeleton:
    """Map every joint through p -> scale * rotation @ p + translation."""
    xf.require_valid()
    return HandSkeleton(xf.apply_points(skeleton.joints))


def flexion_angles(skeleton: HandSkeleton) -> np.ndarray:
    """Interior angle at the 3 interior joints of each finger chain, radians.

    Each finger contributes the angles at its base, middle, and distal joints
    (between the incoming and outgoing bone segments), ordered thumb to pinky,
    proximal to distal; pi means fully straight. Raises on zero-length bones.
    """
    joints = skeleton.joints
    angles = np.empty(15, dtype=np.float64)
    k = 0
    for chain in FINGER_CHAINS:
        path = (JointId.WRIST,) + chain
        for j in range(1, 4):
            u = joints[int(path[j - 1])] - joints[int(path[j])]
            v = joints[int(path[j + 1])] - joints[int(path[j])]
            nu = np.linalg.norm(u)
            nv = np.linalg.norm(v)
            if nu == 0.0 or nv == 0.0:
                raise ValueError(
                    f"degenerate bone at joint {JointId(int(path[j])).name}"
                )
            cos = np.clip(np.dot(u, v) / (nu * nv), -1.0, 1.0)
            angles[k] = np.arccos(cos)
            k += 1
    return angles


def frame_features(prev: GestureFrame | None, cur: GestureFrame) -> np.ndarray:
    """Per-frame feature grid of shape (6 channels, 21 joints).

    Channels 0-2: joint position minus wrist, divided by the mean palm-bone
    length (hand-size normalization). Channels 3-5: backward-difference
    velocity (cur - prev) / dt in scene units per second; zeros on the first
    frame of a sequence.
    """
    if prev is not None and prev.t_ms >= cur.t_ms:
        raise ValueError(
            f"timestamps must increase: prev t={prev.t_ms}, cur t={cur.t_ms}"
        )
    joints = cur.skeleton.joints
    scale = mean_palm_bone_length(cur.skeleton)
    pos = (joints - joints[0]) / scale
    if prev is None:
        vel = np.zeros_like(joints)
    else:
        dt_s = (cur.t_ms - prev.t_ms) / 1000.0
        vel = (joints - prev.skeleton.joints) / dt_s
    return np.concatenate([pos.T, vel.T], axis=0)
