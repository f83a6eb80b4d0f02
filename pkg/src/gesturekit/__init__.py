"""Desk-scale hand gesture recognition.

A deterministic synthetic corpus of 21-joint hand-skeleton gestures, a
from-scratch CNN+LSTM classifier with gaze-weighted fusion, and a streaming
recognition service with latency accounting.
"""

__version__ = "0.1.0"

from gesturekit.skeleton import (
    Bone,
    GestureFrame,
    HandSkeleton,
    JointId,
    RigidTransform,
    bone_lengths,
    bone_topology,
    flexion_angles,
    frame_features,
    validate,
)
from gesturekit.synth import (
    AugmentSpec,
    GenConfig,
    GestureClass,
    GestureSequence,
    augment,
    generate_dataset,
    generate_sequence,
    rest_pose,
    synth_gaze,
)
from gesturekit.model import ModelConfig, RecognizerModel, init_model, predict
from gesturekit.weights_io import load_weights, save_weights

__all__ = [
    "AugmentSpec",
    "Bone",
    "GenConfig",
    "GestureClass",
    "GestureFrame",
    "GestureSequence",
    "HandSkeleton",
    "JointId",
    "ModelConfig",
    "RecognizerModel",
    "RigidTransform",
    "augment",
    "bone_lengths",
    "bone_topology",
    "flexion_angles",
    "frame_features",
    "generate_dataset",
    "generate_sequence",
    "init_model",
    "load_weights",
    "predict",
    "rest_pose",
    "save_weights",
    "synth_gaze",
    "validate",
]
