"""Dataset splitting, the training loop, and evaluation metrics.

Training is deterministic end to end: shuffles, augmentation transforms, and
dropout masks all derive from the run seed through fixed tags, so two runs
with identical inputs produce bitwise-identical parameters and metrics.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import IO, Sequence

import numpy as np

from gesturekit.model import (
    RecognizerModel,
    aggregation_window,
    predict,
    sequence_loss,
)
from gesturekit.optim import OptimizerConfig, init_optimizer_state, optimizer_step
from gesturekit.rng import SplitMix64, mix64
from gesturekit.synth import AugmentSpec, GestureSequence, augment

_SHUFFLE_TAG = 0x5348_5546  # epoch shuffle stream
_DROPOUT_TAG = 0x44524F50  # per-sequence dropout mask stream


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 30
    batch_size: int = 16
    optimizer: OptimizerConfig = OptimizerConfig()
    augment: AugmentSpec | None = AugmentSpec()
    seed: int = 0
    shuffle: bool = True

    def __post_init__(self):
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")

    def to_dict(self) -> dict:
        out: dict = {
            "epochs": self.epochs,
            "batch_size": self.batch_size,
            "optimizer": {
                "kind": self.optimizer.kind,
                "learning_rate": self.optimizer.learning_rate,
                "momentum": self.optimizer.momentum,
                "beta1": self.optimizer.beta1,
                "beta2": self.optimizer.beta2,
                "epsilon": self.optimizer.epsilon,
            },
            "augment": None
            if self.augment is None
            else {
                "rotation_max_rad": self.augment.rotation_max_rad,
                "translation_max": self.augment.translation_max,
                "scale_range": list(self.augment.scale_range),
                "jitter_std": self.augment.jitter_std,
            },
            "seed": self.seed,
            "shuffle": self.shuffle,
        }
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "TrainConfig":
        kwargs: dict = {}
        data = dict(data)
        if "optimizer" in data:
            kwargs["optimizer"] = OptimizerConfig(**data.pop("optimizer"))
        if "augment" in data:
            aug = data.pop("augment")
            if aug is None:
                kwargs["augment"] = None
            else:
                aug = dict(aug)
                if "scale_range" in aug:
                    aug["scale_range"] = tuple(aug["scale_range"])
                kwargs["augment"] = AugmentSpec(**aug)
        allowed = {"epochs", "batch_size", "seed", "shuffle"}
        unknown = set(data) - allowed
        if unknown:
            raise ValueError(f"unknown training config keys: {sorted(unknown)}")
        kwargs.update(data)
        return cls(**kwargs)


@dataclass(frozen=True)
class EpochRecord:
    epoch: int
    mean_train_loss: float
    train_accuracy: float
    val_accuracy: float


@dataclass(frozen=True)
class EvalResult:
    accuracy: float
    confusion: np.ndarray  # (C, C) counts, rows = true class, cols = predicted
    precision: np.ndarray  # (C,)
    recall: np.ndarray  # (C,)


@dataclass
class Metrics:
    epochs: list[EpochRecord] = field(default_factory=list)
    final: EvalResult | None = None


def split(
    dataset: Sequence[GestureSequence], val_fraction: float, seed: int
) -> tuple[list[GestureSequence], list[GestureSequence]]:
    """Stratified split: per class, a seeded shuffle, then the first
    ceil(n * val_fraction) sequences go to validation."""
    if not dataset:
        raise ValueError("dataset is empty")
    if not 0.0 < val_fraction < 1.0:
        raise ValueError("val_fraction must be in (0, 1)")
    by_class: dict[int, list[int]] = {}
    for idx, seq in enumerate(dataset):
        by_class.setdefault(int(seq.label), []).append(idx)
    train_idx: list[int] = []
    val_idx: list[int] = []
    for cls in sorted(by_class):
        indices = by_class[cls]
        if len(indices) < 2:
            raise ValueError(
                f"class {cls} has {len(indices)} sequence(s); need >= 2 to split"
            )
        shuffled = SplitMix64(mix64(seed, cls)).shuffled(indices)
        k = math.ceil(len(shuffled) * val_fraction)
        val_idx.extend(shuffled[:k])
        train_idx.extend(shuffled[k:])
    return [dataset[i] for i in train_idx], [dataset[i] for i in val_idx]


def evaluate(
    model: RecognizerModel, dataset: Sequence[GestureSequence]
) -> EvalResult:
    """Accuracy plus a confusion matrix (rows true, columns predicted)."""
    if not dataset:
        raise ValueError("dataset is empty")
    classes = model.config.class_count
    confusion = np.zeros((classes, classes), dtype=np.int64)
    for seq in dataset:
        true = int(seq.label)
        if true >= classes:
            raise ValueError(
                f"label {true} out of range for a {classes}-class model"
            )
        confusion[true, int(predict(model, seq).label)] += 1
    correct = int(np.trace(confusion))
    row = confusion.sum(axis=1)
    col = confusion.sum(axis=0)
    with np.errstate(invalid="ignore", divide="ignore"):
        precision = np.where(col > 0, np.diag(confusion) / col, 0.0)
        recall = np.where(row > 0, np.diag(confusion) / row, 0.0)
    return EvalResult(
        accuracy=correct / len(dataset),
        confusion=confusion,
        precision=precision,
        recall=recall,
    )


def train(
    model: RecognizerModel,
    train_set: Sequence[GestureSequence],
    val_set: Sequence[GestureSequence],
    config: TrainConfig,
) -> tuple[RecognizerModel, Metrics]:
    """Minimize mean cross-entropy over the final-window timesteps.

    Per epoch: seeded shuffle, then per batch a fresh augmentation of each
    sequence (seed mix64(run seed, epoch, sequence index)), forward in
    training mode, summed gradients in example order, one optimizer step.
    Train accuracy is measured from the training-mode forward passes; val
    accuracy from a clean inference pass per epoch.
    """
    if not train_set:
        raise ValueError("training set is empty")
    classes = model.config.class_count
    for seq in list(train_set) + list(val_set):
        if int(seq.label) >= classes:
            raise ValueError(
                f"label {int(seq.label)} out of range for a {classes}-class model"
            )
    params = dict(model.params)
    opt_state = init_optimizer_state(params, config.optimizer)
    metrics = Metrics()
    n = len(train_set)
    for epoch in range(1, config.epochs + 1):
        order = list(range(n))
        if config.shuffle:
            order = SplitMix64(mix64(config.seed, _SHUFFLE_TAG, epoch)).shuffled(order)
        epoch_losses = []
        epoch_correct = 0
        current = RecognizerModel(model.config, params, model.version)
        for start in range(0, n, config.batch_size):
            batch = order[start : start + config.batch_size]
            batch_grads: dict[str, np.ndarray] | None = None
            for idx in batch:
                seq = train_set[idx]
                if config.augment is not None:
                    seq = augment(seq, config.augment, mix64(config.seed, epoch, idx))
                try:
                    loss, grads, probs = sequence_loss(
                        current,
                        seq.frames,
                        int(seq.label),
                        training=True,
                        seed=mix64(config.seed, _DROPOUT_TAG, epoch, idx),
                    )
                except ValueError as exc:  # non-finite activations surface here
                    raise RuntimeError(
                        f"training diverged at epoch {epoch}, batch starting "
                        f"at {start}, sequence {idx}: {exc}"
                    ) from exc
                if not np.isfinite(loss):
                    raise RuntimeError(
                        f"non-finite training loss at epoch {epoch}, "
                        f"batch starting at {start}, sequence {idx}"
                    )
                epoch_losses.append(loss)
                pred = int(
                    np.argmax(probs[-aggregation_window(probs.shape[0]) :].mean(axis=0))
                )
                epoch_correct += pred == int(seq.label)
                if batch_grads is None:
                    batch_grads = grads
                else:
                    for name in batch_grads:
                        batch_grads[name] += grads[name]
            scale = 1.0 / len(batch)
            for name in batch_grads:
                batch_grads[name] *= scale
            params, opt_state = optimizer_step(
                params, batch_grads, opt_state, config.optimizer
            )
            current = RecognizerModel(model.config, params, model.version)
        val_acc = (
            evaluate(current, val_set).accuracy if val_set else float("nan")
        )
        metrics.epochs.append(
            EpochRecord(
                epoch=epoch,
                mean_train_loss=float(np.mean(epoch_losses)),
                train_accuracy=epoch_correct / n,
                val_accuracy=val_acc,
            )
        )
    trained = RecognizerModel(model.config, params, model.version)
    metrics.final = evaluate(trained, val_set if val_set else train_set)
    return trained, metrics


def write_metrics(metrics: Metrics, dest: str | Path | IO[str]) -> None:
    """JSON Lines: one epoch record per line, then one summary line."""
    if hasattr(dest, "write"):
        _write_metrics(metrics, dest)
        return
    with open(dest, "w", encoding="utf-8", newline="\n") as fh:
        _write_metrics(metrics, fh)


def _write_metrics(metrics: Metrics, fh: IO[str]) -> None:
    for rec in metrics.epochs:
        fh.write(
            json.dumps(
                {
                    "type": "epoch",
                    "epoch": rec.epoch,
                    "mean_train_loss": rec.mean_train_loss,
                    "train_accuracy": rec.train_accuracy,
                    "val_accuracy": rec.val_accuracy,
                },
                separators=(",", ":"),
            )
        )
        fh.write("\n")
    if metrics.final is not None:
        fh.write(
            json.dumps(
                {
                    "type": "summary",
                    "accuracy": metrics.final.accuracy,
                    "confusion": metrics.final.confusion.tolist(),
                    "precision": metrics.final.precision.tolist(),
                    "recall": metrics.final.recall.tolist(),
                },
                separators=(",", ":"),
            )
        )
        fh.write("\n")
