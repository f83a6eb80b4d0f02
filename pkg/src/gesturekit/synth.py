"""Deterministic synthetic gesture corpus.

Eight gesture classes (five held poses, three wrist trajectories) are
synthesized from a fixed kinematic hand model: fingers fan out from the wrist
in the x-y plane and curl toward -z. All randomness comes from SplitMix64
streams keyed by explicit seeds, so a (class, config, seed) triple pins every
byte of the output.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import IntEnum

import numpy as np

from gesturekit.rng import SplitMix64, mix64
from gesturekit.skeleton import (
    GestureFrame,
    HandSkeleton,
    JointId,
    RigidTransform,
    apply_transform,
    rotation_about,
    validate,
)

GENERATOR_VERSION = "0.1.0"

CLASS_COUNT = 8


class GestureClass(IntEnum):
    """Gesture label: a fixed id<->name bijection over the 8 classes."""

    OPEN_PALM = 0
    FIST = 1
    PINCH = 2
    POINT = 3
    SWIPE_LEFT = 4
    SWIPE_RIGHT = 5
    WAVE = 6
    THUMBS_UP = 7

    @property
    def label(self) -> str:
        return self.name.lower()

    @classmethod
    def from_label(cls, name: str) -> "GestureClass":
        try:
            return cls[name.upper()]
        except KeyError:
            raise ValueError(f"unknown gesture class name {name!r}") from None


CLASS_NAMES = tuple(c.label for c in GestureClass)

STATIC_CLASSES = (
    GestureClass.OPEN_PALM,
    GestureClass.FIST,
    GestureClass.PINCH,
    GestureClass.POINT,
    GestureClass.THUMBS_UP,
)
DYNAMIC_CLASSES = (
    GestureClass.SWIPE_LEFT,
    GestureClass.SWIPE_RIGHT,
    GestureClass.WAVE,
)


@dataclass(frozen=True)
class Provenance:
    generator_version: str
    seed: int
    augmented: bool


@dataclass(frozen=True)
class GenConfig:
    frames_per_sequence: int = 30
    frame_interval_ms: int = 33
    noise_std: float = 0.02
    seed: int = 0

    def validated(self) -> "GenConfig":
        if self.frames_per_sequence < 2:
            raise ValueError("frames_per_sequence must be >= 2")
        if self.frame_interval_ms < 1:
            raise ValueError("frame_interval_ms must be >= 1")
        if self.noise_std < 0:
            raise ValueError("noise_std must be non-negative")
        return self


@dataclass(frozen=True)
class AugmentSpec:
    rotation_max_rad: float = 0.35
    translation_max: float = 0.5
    scale_range: tuple[float, float] = (0.85, 1.15)
    jitter_std: float = 0.01

    def validated(self) -> "AugmentSpec":
        if self.rotation_max_rad < 0:
            raise ValueError("rotation_max_rad must be non-negative")
        if self.translation_max < 0:
            raise ValueError("translation_max must be non-negative")
        lo, hi = self.scale_range
        if not (0 < lo <= hi):
            raise ValueError(f"scale_range must satisfy 0 < lo <= hi, got {self.scale_range}")
        if self.jitter_std < 0:
            raise ValueError("jitter_std must be non-negative")
        return self


@dataclass(frozen=True, eq=False)
class GestureSequence:
    label: GestureClass
    frames: tuple[GestureFrame, ...]
    provenance: Provenance

    def __post_init__(self):
        frames = tuple(self.frames)
        object.__setattr__(self, "frames", frames)
        object.__setattr__(self, "label", GestureClass(self.label))
        for i, f in enumerate(frames):
            if i and frames[i - 1].t_ms >= f.t_ms:
                raise ValueError(
                    f"frame timestamps must strictly increase (frame {i})"
                )
            result = validate(f.skeleton)
            if not result.ok:
                raise ValueError(
                    f"frame {i} has an invalid skeleton: "
                    + "; ".join(result.violations)
                )

    def __eq__(self, other):
        if not isinstance(other, GestureSequence):
            return NotImplemented
        return (
            int(self.label) == int(other.label)
            and self.provenance == other.provenance
            and self.frames == other.frames
        )

    def __len__(self):
        return len(self.frames)


# ---------------------------------------------------------------------------
# Kinematic hand model
# ---------------------------------------------------------------------------

# Palm-bone length per finger, thumb..pinky (scene units).
_PALM_LENGTHS = (0.5, 0.95, 1.0, 0.95, 0.85)
# Abduction angle of each finger ray from the middle-finger axis (+y), degrees.
_ABDUCTION_DEG = (-45.0, -12.0, 0.0, 12.0, 26.0)
# Phalanx lengths: thumb absolute; other fingers share a template scaled by
# their palm-bone length (middle finger = 1.0 is the reference).
_THUMB_PHALANGES = (0.45, 0.35, 0.30)
_FINGER_TEMPLATE = (0.45, 0.28, 0.22)
# Per-joint bend (radians) at full curl, proximal to distal.
_CURL_BEND = (1.6, 1.8, 1.3)
# Curl rotates finger segments out of the palm plane toward -z.
_CURL_AXIS = np.array([0.0, 0.0, -1.0])

# Per-finger curl targets in [0, 1] for the held poses: thumb..pinky.
CLASS_CURLS = {
    GestureClass.OPEN_PALM: (0.0, 0.0, 0.0, 0.0, 0.0),
    GestureClass.FIST: (1.0, 1.0, 1.0, 1.0, 1.0),
    GestureClass.PINCH: (0.55, 0.6, 0.15, 0.15, 0.15),
    GestureClass.POINT: (1.0, 0.0, 1.0, 1.0, 1.0),
    GestureClass.THUMBS_UP: (0.0, 1.0, 1.0, 1.0, 1.0),
}
_HALF_OPEN_CURLS = (0.4, 0.4, 0.4, 0.4, 0.4)

# Joint whose x-y projection the synthesized gaze tracks, per class.
FOCAL_JOINTS = {
    GestureClass.OPEN_PALM: JointId.MIDDLE_TIP,
    GestureClass.FIST: JointId.MIDDLE_TIP,
    GestureClass.PINCH: JointId.INDEX_TIP,
    GestureClass.POINT: JointId.INDEX_TIP,
    GestureClass.THUMBS_UP: JointId.THUMB_TIP,
    GestureClass.SWIPE_LEFT: JointId.WRIST,
    GestureClass.SWIPE_RIGHT: JointId.WRIST,
    GestureClass.WAVE: JointId.WRIST,
}

GAZE_NOISE_STD = 0.05

_SWIPE_DISTANCE = 2.0
_WAVE_AMPLITUDE = 0.8
_WAVE_PERIODS = 2


def _finger_direction(finger: int) -> np.ndarray:
    theta = math.radians(_ABDUCTION_DEG[finger])
    return np.array([math.sin(theta), math.cos(theta), 0.0])


def _phalanx_lengths(finger: int) -> tuple[float, float, float]:
    if finger == 0:
        return _THUMB_PHALANGES
    s = _PALM_LENGTHS[finger]
    return tuple(t * s for t in _FINGER_TEMPLATE)


def pose_from_curls(curls) -> HandSkeleton:
    """Hand pose for five per-finger curl parameters in [0, 1].

    Curl 0 leaves the finger straight along its ray in the x-y plane; curl 1
    bends its three joints by the full per-joint bend angles toward -z. Bone
    lengths are constants of the model, so any curl value yields a valid pose.
    """
    joints = np.zeros((21, 3))
    for f in range(5):
        d = _finger_direction(f)
        base = 1 + 4 * f
        joints[base] = _PALM_LENGTHS[f] * d
        pos = joints[base].copy()
        phi = 0.0
        for j, (length, bend) in enumerate(zip(_phalanx_lengths(f), _CURL_BEND)):
            phi += curls[f] * bend
            segment = math.cos(phi) * d + math.sin(phi) * _CURL_AXIS
            pos = pos + length * segment
            joints[base + 1 + j] = pos
    return HandSkeleton(joints)


def rest_pose() -> HandSkeleton:
    """The canonical open hand: all fingers straight, wrist at the origin."""
    return pose_from_curls((0.0, 0.0, 0.0, 0.0, 0.0))


def _wrist_offset(gesture: GestureClass, k: int, n: int) -> np.ndarray:
    s = k / (n - 1)
    if gesture == GestureClass.SWIPE_LEFT:
        return np.array([-_SWIPE_DISTANCE * s, 0.0, 0.0])
    if gesture == GestureClass.SWIPE_RIGHT:
        return np.array([_SWIPE_DISTANCE * s, 0.0, 0.0])
    if gesture == GestureClass.WAVE:
        return np.array(
            [_WAVE_AMPLITUDE * math.sin(2.0 * math.pi * _WAVE_PERIODS * s), 0.0, 0.0]
        )
    raise ValueError(f"{gesture!r} has no trajectory")


def generate_sequence(
    gesture: GestureClass, config: GenConfig, seed: int
) -> GestureSequence:
    """Synthesize one gesture sequence, a pure function of its arguments.

    Held poses ramp from the rest pose to the class target over the first 40%
    of frames and then hold; trajectory classes hold a half-open pose while
    the wrist translates. Isotropic Gaussian noise of `config.noise_std` is
    then added to every joint coordinate, drawn frame-major from the seeded
    SplitMix64 stream.
    """
    gesture = GestureClass(gesture)
    config.validated()
    n = config.frames_per_sequence
    poses = np.empty((n, 21, 3))
    if gesture in CLASS_CURLS:
        target = np.asarray(CLASS_CURLS[gesture])
        ramp = math.ceil(0.4 * n)
        hold_pose = pose_from_curls(target).joints
        for k in range(n):
            s = 1.0 if ramp <= 1 else min(1.0, k / (ramp - 1))
            poses[k] = hold_pose if s >= 1.0 else pose_from_curls(s * target).joints
    else:
        base = pose_from_curls(_HALF_OPEN_CURLS).joints
        for k in range(n):
            poses[k] = base + _wrist_offset(gesture, k, n)
    if config.noise_std > 0:
        rng = SplitMix64(seed)
        poses = poses + config.noise_std * rng.normals(n * 63).reshape(n, 21, 3)
    frames = tuple(
        GestureFrame(k * config.frame_interval_ms, HandSkeleton(poses[k]))
        for k in range(n)
    )
    return GestureSequence(
        label=gesture,
        frames=frames,
        provenance=Provenance(GENERATOR_VERSION, seed & ((1 << 64) - 1), False),
    )


def synth_gaze(
    seq: GestureSequence, seed: int, noise_std: float = GAZE_NOISE_STD
) -> GestureSequence:
    """Fill per-frame gaze: the class focal joint's x-y projection plus noise.

    Held poses are watched at their class-defining fingertip, trajectories at
    the wrist, so gaze genuinely carries class information.
    """
    if not seq.frames:
        raise ValueError("sequence has no frames")
    focal = int(FOCAL_JOINTS[GestureClass(seq.label)])
    n = len(seq.frames)
    if noise_std > 0:
        noise = noise_std * SplitMix64(seed).normals(2 * n).reshape(n, 2)
    else:
        noise = np.zeros((n, 2))
    frames = tuple(
        replace(f, gaze=f.skeleton.joints[focal, :2] + noise[k])
        for k, f in enumerate(seq.frames)
    )
    return replace(seq, frames=frames)


def _draw_transform(spec: AugmentSpec, rng: SplitMix64) -> RigidTransform:
    u = rng.uniforms(7)
    z = 2.0 * u[0] - 1.0
    phi = 2.0 * math.pi * u[1]
    r = math.sqrt(max(0.0, 1.0 - z * z))
    axis = np.array([r * math.cos(phi), r * math.sin(phi), z])
    angle = (2.0 * u[2] - 1.0) * spec.rotation_max_rad
    translation = (2.0 * u[3:6] - 1.0) * spec.translation_max
    lo, hi = spec.scale_range
    scale = lo + u[6] * (hi - lo)
    return RigidTransform(rotation_about(axis, angle), translation, scale)


def augment_transform(spec: AugmentSpec, seed: int) -> RigidTransform:
    """The similarity transform augment() with this seed will apply."""
    return _draw_transform(spec.validated(), SplitMix64(seed))


def _transformed_frames(
    frames: tuple[GestureFrame, ...], xf: RigidTransform
) -> list[GestureFrame]:
    return [
        replace(
            f,
            skeleton=apply_transform(f.skeleton, xf),
            gaze=None if f.gaze is None else xf.apply_xy(f.gaze),
        )
        for f in frames
    ]


def transform_sequence(seq: GestureSequence, xf: RigidTransform) -> GestureSequence:
    """Apply one rigid transform to every frame; gaze follows its x-y restriction."""
    return replace(seq, frames=tuple(_transformed_frames(seq.frames, xf)))


def augment(seq: GestureSequence, spec: AugmentSpec, seed: int) -> GestureSequence:
    """Randomly transformed copy of a sequence: one similarity transform for
    the whole sequence (per-frame transforms would destroy motion semantics),
    then per-joint Gaussian jitter. Label, frame count, and timestamps are
    preserved; the augmented flag is set.
    """
    spec.validated()
    rng = SplitMix64(seed)
    xf = _draw_transform(spec, rng)
    frames = _transformed_frames(seq.frames, xf)
    if spec.jitter_std > 0:
        n = len(frames)
        noise = spec.jitter_std * rng.normals(n * 63).reshape(n, 21, 3)
        frames = [
            replace(f, skeleton=HandSkeleton(f.skeleton.joints + noise[k]))
            for k, f in enumerate(frames)
        ]
    return GestureSequence(
        label=seq.label,
        frames=tuple(frames),
        provenance=replace(seq.provenance, augmented=True),
    )


_GAZE_SEED_TAG = 0x6761_7A65  # distinct stream for gaze noise


def generate_dataset(per_class: int, config: GenConfig) -> list[GestureSequence]:
    """Balanced corpus of 8 * per_class sequences with gaze filled.

    Sequence i of class c is seeded with mix64(config.seed, c, i), so any
    sequence can be regenerated in isolation.
    """
    if per_class < 1:
        raise ValueError("per_class must be >= 1")
    config.validated()
    out = []
    for gesture in GestureClass:
        for i in range(per_class):
            seed = mix64(config.seed, int(gesture), i)
            seq = generate_sequence(gesture, config, seed)
            out.append(synth_gaze(seq, mix64(seed, _GAZE_SEED_TAG)))
    return out
