"""Gradient-descent optimizers over named parameter collections."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class OptimizerConfig:
    kind: str = "adam"
    learning_rate: float = 1e-3
    momentum: float = 0.0  # sgd only
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8

    def __post_init__(self):
        if self.kind not in ("sgd", "adam"):
            raise ValueError(f"unknown optimizer kind {self.kind!r}")
        # lr 0 is allowed: it makes "training changes nothing" testable
        if self.learning_rate < 0:
            raise ValueError("learning_rate must be non-negative")
        if not 0.0 <= self.momentum < 1.0:
            raise ValueError("momentum must be in [0, 1)")
        if not (0.0 <= self.beta1 < 1.0 and 0.0 <= self.beta2 < 1.0):
            raise ValueError("betas must be in [0, 1)")
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")


def init_optimizer_state(
    params: dict[str, np.ndarray], config: OptimizerConfig
) -> dict:
    zeros = {name: np.zeros_like(p) for name, p in params.items()}
    if config.kind == "sgd":
        return {"v": zeros}
    return {"t": 0, "m": zeros, "v": {n: np.zeros_like(p) for n, p in params.items()}}


def optimizer_step(
    params: dict[str, np.ndarray],
    grads: dict[str, np.ndarray],
    state: dict,
    config: OptimizerConfig,
) -> tuple[dict[str, np.ndarray], dict]:
    """One update; returns fresh (params, state) dicts, inputs untouched."""
    if set(params) != set(grads):
        raise ValueError("params and grads must have identical names")
    for name in params:
        if params[name].shape != grads[name].shape:
            raise ValueError(
                f"shape mismatch for {name}: {params[name].shape} vs "
                f"{grads[name].shape}"
            )
    lr = config.learning_rate
    new_params = {}
    if config.kind == "sgd":
        new_v = {}
        for name, theta in params.items():
            v = config.momentum * state["v"][name] - lr * grads[name]
            new_v[name] = v
            new_params[name] = theta + v
        return new_params, {"v": new_v}
    t = state["t"] + 1
    bc1 = 1.0 - config.beta1**t
    bc2 = 1.0 - config.beta2**t
    new_m, new_v = {}, {}
    for name, theta in params.items():
        g = grads[name]
        m = config.beta1 * state["m"][name] + (1.0 - config.beta1) * g
        v = config.beta2 * state["v"][name] + (1.0 - config.beta2) * (g * g)
        new_m[name] = m
        new_v[name] = v
        new_params[name] = theta - lr * (m / bc1) / (np.sqrt(v / bc2) + config.epsilon)
    return new_params, {"t": t, "m": new_m, "v": new_v}
