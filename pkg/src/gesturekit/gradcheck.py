"""Finite-difference verification of analytic gradients.

The only trustworthy referee for hand-derived backward passes: perturb every
scalar parameter by +/-h, difference the losses, and compare against the
analytic gradient. Loss functions must be pure and must hold dropout in
inference mode (a resampled mask would make the loss non-differentiable in
the parameter).
"""

from __future__ import annotations

from typing import Callable

import numpy as np

LossFn = Callable[[dict, bool], tuple[float, dict | None]]


def gradient_check(
    loss_fn: LossFn, params: dict[str, np.ndarray], h: float = 1e-6
) -> float:
    """Max relative error between analytic and central-difference gradients.

    `loss_fn(params, need_grads)` returns (loss, grads-dict-or-None). The
    relative error for each scalar is |a - n| / max(|a|, |n|, 1e-8).
    """
    loss0, grads = loss_fn(params, True)
    if not np.isfinite(loss0):
        raise ValueError(f"loss is not finite: {loss0}")
    if grads is None:
        raise ValueError("loss_fn returned no gradients")
    work = {name: p.copy() for name, p in params.items()}
    worst = 0.0
    for name, theta in work.items():
        analytic = grads[name]
        if analytic.shape != theta.shape:
            raise ValueError(
                f"gradient shape mismatch for {name}: "
                f"{analytic.shape} vs {theta.shape}"
            )
        flat = theta.reshape(-1)
        aflat = analytic.reshape(-1)
        for idx in range(flat.size):
            orig = flat[idx]
            flat[idx] = orig + h
            lp, _ = loss_fn(work, False)
            flat[idx] = orig - h
            lm, _ = loss_fn(work, False)
            flat[idx] = orig
            numeric = (lp - lm) / (2.0 * h)
            err = abs(aflat[idx] - numeric) / max(abs(aflat[idx]), abs(numeric), 1e-8)
            worst = max(worst, err)
    return worst
