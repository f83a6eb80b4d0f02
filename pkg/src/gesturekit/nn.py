"""From-scratch differentiable layers on float64 numpy arrays.

Every layer ships a forward and a hand-derived backward; nothing here is
autodiff. All ops accept arbitrary leading batch axes ahead of the documented
operand axes (a bare vector works too), and all forwards are pure: same input
bytes, same output bytes. Randomness (dropout masks) comes from explicit
SplitMix64 seeds.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from gesturekit.rng import SplitMix64


def _sigmoid(x: np.ndarray) -> np.ndarray:
    with np.errstate(over="ignore"):
        return 1.0 / (1.0 + np.exp(-x))


# ---------------------------------------------------------------------------
# Activations
# ---------------------------------------------------------------------------


def relu(x: np.ndarray) -> np.ndarray:
    """Elementwise max(0, x)."""
    return np.maximum(x, 0.0)


def relu_backward(dout: np.ndarray, x: np.ndarray) -> np.ndarray:
    # gradient is 0 at exactly 0
    return dout * (x > 0.0)


# ---------------------------------------------------------------------------
# Dense
# ---------------------------------------------------------------------------


def dense_forward(x: np.ndarray, weights: np.ndarray, bias: np.ndarray) -> np.ndarray:
    """Affine map: out = weights @ x + bias, batched over leading axes of x."""
    if weights.ndim != 2 or bias.shape != (weights.shape[0],):
        raise ValueError(
            f"weights must be (n_out, n_in) with matching bias, got "
            f"{weights.shape} and {bias.shape}"
        )
    if x.shape[-1] != weights.shape[1]:
        raise ValueError(
            f"input size {x.shape[-1]} does not match weights n_in {weights.shape[1]}"
        )
    return x @ weights.T + bias


def dense_backward(
    dout: np.ndarray, x: np.ndarray, weights: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Returns (dx, dweights, dbias); batch axes are summed into the params."""
    d2 = dout.reshape(-1, weights.shape[0])
    x2 = x.reshape(-1, weights.shape[1])
    return dout @ weights, d2.T @ x2, d2.sum(axis=0)


# ---------------------------------------------------------------------------
# 1D convolution (same padding, cross-correlation)
# ---------------------------------------------------------------------------


def _conv_cols(x: np.ndarray, k: int) -> np.ndarray:
    """im2col for same-padded window k: (..., C, L) -> (..., L, C*k)."""
    pad = (k - 1) // 2
    xp = np.zeros(x.shape[:-1] + (x.shape[-1] + 2 * pad,))
    xp[..., pad : pad + x.shape[-1]] = x
    win = sliding_window_view(xp, k, axis=-1)  # (..., C, L, k)
    win = np.moveaxis(win, -3, -2)  # (..., L, C, k)
    return win.reshape(*win.shape[:-2], win.shape[-2] * k)


def _conv1d_with_cols(
    x: np.ndarray, kernels: np.ndarray, bias: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    c_out, c_in, k = kernels.shape
    if k % 2 == 0:
        raise ValueError(f"kernel size must be odd, got {k}")
    if x.shape[-2] != c_in:
        raise ValueError(f"input has {x.shape[-2]} channels, kernels expect {c_in}")
    if bias.shape != (c_out,):
        raise ValueError(f"bias shape {bias.shape} != ({c_out},)")
    cols = _conv_cols(x, k)  # (..., L, C_in*k)
    out = cols @ kernels.reshape(c_out, c_in * k).T + bias
    return np.moveaxis(out, -1, -2), cols  # (..., C_out, L)


def conv1d_forward(
    x: np.ndarray, kernels: np.ndarray, bias: np.ndarray
) -> np.ndarray:
    """Same-padded 1D cross-correlation: (..., C_in, L) -> (..., C_out, L)."""
    return _conv1d_with_cols(x, kernels, bias)[0]


def conv1d_backward(
    dout: np.ndarray,
    x: np.ndarray,
    kernels: np.ndarray,
    cols: np.ndarray | None = None,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Returns (dx, dkernels, dbias) for conv1d_forward.

    Pass the forward pass's im2col buffer as `cols` to skip recomputing it.
    """
    c_out, c_in, k = kernels.shape
    length = x.shape[-1]
    pad = (k - 1) // 2
    dmat = np.moveaxis(dout, -2, -1)  # (..., L, C_out)
    if cols is None:
        cols = _conv_cols(x, k)
    d2 = dmat.reshape(-1, c_out)
    dkernels = (d2.T @ cols.reshape(-1, c_in * k)).reshape(c_out, c_in, k)
    dbias = d2.sum(axis=0)
    dcols = dmat @ kernels.reshape(c_out, c_in * k)  # (..., L, C_in*k)
    dcols = dcols.reshape(*dcols.shape[:-1], c_in, k)
    dcols = np.moveaxis(dcols, -3, -2)  # (..., C_in, L, k)
    dxp = np.zeros(x.shape[:-1] + (length + 2 * pad,))
    for j in range(k):
        dxp[..., j : j + length] += dcols[..., j]
    return dxp[..., pad : pad + length], dkernels, dbias


# ---------------------------------------------------------------------------
# Max pooling (window 2, stride 2)
# ---------------------------------------------------------------------------


def maxpool1d_forward(
    x: np.ndarray, window: int = 2, stride: int = 2
) -> tuple[np.ndarray, np.ndarray]:
    """Windowed maximum: (..., C, L) -> (..., C, L//2); ties go to the lower
    index so backward routing is deterministic. Returns (out, argmax)."""
    if window != 2 or stride != 2:
        raise ValueError("only window=2, stride=2 pooling is supported")
    length = x.shape[-1]
    if length < 2:
        raise ValueError(f"pooling needs length >= 2, got {length}")
    m = length // 2
    pairs = x[..., : 2 * m].reshape(*x.shape[:-1], m, 2)
    arg = pairs.argmax(axis=-1)  # first max wins: lower index on ties
    out = np.take_along_axis(pairs, arg[..., None], axis=-1)[..., 0]
    return out, arg


def maxpool1d_backward(
    dout: np.ndarray, argmax: np.ndarray, in_length: int
) -> np.ndarray:
    """Routes each output gradient to the position that won the window max."""
    m = dout.shape[-1]
    buf = np.zeros(dout.shape + (2,))
    np.put_along_axis(buf, argmax[..., None], dout[..., None], axis=-1)
    dx = np.zeros(dout.shape[:-1] + (in_length,))
    dx[..., : 2 * m] = buf.reshape(*dout.shape[:-1], 2 * m)
    return dx


# ---------------------------------------------------------------------------
# Dropout
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DropoutSpec:
    keep_prob: float
    training: bool

    def __post_init__(self):
        if not 0.0 < self.keep_prob <= 1.0:
            raise ValueError(f"keep_prob must be in (0, 1], got {self.keep_prob}")


def dropout(
    x: np.ndarray, spec: DropoutSpec, seed: int
) -> tuple[np.ndarray, np.ndarray | None]:
    """Inverted dropout: keep each activation with probability keep_prob and
    scale kept values by 1/keep_prob, so the training-mode expectation equals
    the input. Inference mode is the exact identity (mask is None). The mask
    is drawn elementwise in row-major order from SplitMix64(seed).
    """
    if not spec.training:
        return x, None
    u = SplitMix64(seed).uniforms(x.size).reshape(x.shape)
    mask = (u < spec.keep_prob).astype(np.float64)
    return x * (mask / spec.keep_prob), mask


def dropout_backward(
    dout: np.ndarray, mask: np.ndarray | None, keep_prob: float
) -> np.ndarray:
    if mask is None:
        return dout
    return dout * (mask / keep_prob)


# ---------------------------------------------------------------------------
# Softmax and cross-entropy
# ---------------------------------------------------------------------------


def softmax(logits: np.ndarray) -> np.ndarray:
    """Numerically stable softmax along the last axis."""
    if not np.isfinite(logits).all():
        raise ValueError("softmax requires finite logits")
    z = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


@dataclass(frozen=True)
class ClassTarget:
    class_count: int
    true_class: int

    def __post_init__(self):
        if not 0 <= self.true_class < self.class_count:
            raise ValueError(
                f"true_class {self.true_class} not in [0, {self.class_count})"
            )


_LOG_FLOOR = 1e-300


def cross_entropy(pred: np.ndarray, target: ClassTarget) -> tuple[float, np.ndarray]:
    """Cross-entropy of a probability vector against a one-hot target.

    Returns (loss, gradient w.r.t. the pre-softmax logits). With a one-hot
    target the loss is -log(pred[true]) and the fused logit gradient is
    pred - onehot, which avoids the cancellation of chaining the two jacobians.
    """
    pred = np.asarray(pred, dtype=np.float64)
    if pred.shape != (target.class_count,):
        raise ValueError(f"pred shape {pred.shape} != ({target.class_count},)")
    total = pred.sum()
    if abs(total - 1.0) > 1e-6:
        raise ValueError(f"pred is not normalized (sum = {total!r})")
    loss = -np.log(max(pred[target.true_class], _LOG_FLOOR))
    grad = pred.copy()
    grad[target.true_class] -= 1.0
    return float(loss), grad


# ---------------------------------------------------------------------------
# LSTM
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LSTMState:
    """Recurrent state: hidden output h and cell memory c, equal lengths."""

    h: np.ndarray
    c: np.ndarray

    def __post_init__(self):
        if self.h.shape != self.c.shape or self.h.ndim != 1:
            raise ValueError(
                f"h and c must be equal-length vectors, got {self.h.shape} "
                f"and {self.c.shape}"
            )


def zero_state(hidden_size: int) -> LSTMState:
    return LSTMState(np.zeros(hidden_size), np.zeros(hidden_size))


@dataclass(frozen=True)
class LSTMParams:
    """Gate parameters; each W_* is (hidden, n_in + hidden) over concat(x, h)."""

    W_i: np.ndarray
    b_i: np.ndarray
    W_f: np.ndarray
    b_f: np.ndarray
    W_g: np.ndarray
    b_g: np.ndarray
    W_o: np.ndarray
    b_o: np.ndarray

    @property
    def hidden_size(self) -> int:
        return self.W_i.shape[0]

    @property
    def input_size(self) -> int:
        return self.W_i.shape[1] - self.W_i.shape[0]

    def check(self):
        h = self.hidden_size
        d = self.W_i.shape[1]
        for name in ("W_i", "W_f", "W_g", "W_o"):
            if getattr(self, name).shape != (h, d):
                raise ValueError(f"{name} shape {getattr(self, name).shape} != ({h}, {d})")
        for name in ("b_i", "b_f", "b_g", "b_o"):
            if getattr(self, name).shape != (h,):
                raise ValueError(f"{name} shape {getattr(self, name).shape} != ({h},)")


# Internal stacking puts the three sigmoid gates first so one sigmoid call
# covers them: rows ordered [i, f, o, g].
_GATE_ROWS = ("i", "f", "o", "g")


def _stacked(params: LSTMParams) -> tuple[np.ndarray, np.ndarray]:
    w = np.concatenate([params.W_i, params.W_f, params.W_o, params.W_g], axis=0)
    b = np.concatenate([params.b_i, params.b_f, params.b_o, params.b_g])
    return w, b


def _gates(a: np.ndarray, h: int):
    s = _sigmoid(a[: 3 * h])
    return s[:h], s[h : 2 * h], s[2 * h :], np.tanh(a[3 * h :])


def lstm_cell(
    x: np.ndarray, state: LSTMState, params: LSTMParams
) -> tuple[LSTMState, tuple]:
    """One LSTM step: gates i, f, o and candidate g over concat(x, h);
    c' = f*c + i*g, h' = o*tanh(c'). Returns the new state and a cache for
    the backward pass."""
    params.check()
    if x.shape != (params.input_size,):
        raise ValueError(f"input shape {x.shape} != ({params.input_size},)")
    if state.h.shape != (params.hidden_size,):
        raise ValueError(
            f"state size {state.h.shape[0]} != hidden {params.hidden_size}"
        )
    w, b = _stacked(params)
    xt = np.concatenate([x, state.h])
    i, f, o, g = _gates(w @ xt + b, params.hidden_size)
    c = f * state.c + i * g
    tc = np.tanh(c)
    h = o * tc
    cache = (xt, state.c, i, f, o, g, c, tc)
    return LSTMState(h, c), cache


def _cell_grads(dh, dc, cache):
    """Shared gate-gradient algebra; returns (da (4H,), dc_prev).

    da rows follow the internal [i, f, o, g] stacking.
    """
    xt, c_prev, i, f, o, g, c, tc = cache
    do = dh * tc
    dc_total = dc + dh * o * (1.0 - tc * tc)
    da = np.concatenate(
        [
            dc_total * g * i * (1.0 - i),
            dc_total * c_prev * f * (1.0 - f),
            do * o * (1.0 - o),
            dc_total * i * (1.0 - g * g),
        ]
    )
    return da, dc_total * f


def lstm_cell_backward(
    dh: np.ndarray, dc: np.ndarray, cache: tuple, params: LSTMParams
) -> tuple[np.ndarray, np.ndarray, np.ndarray, dict[str, np.ndarray]]:
    """Backward of one step: (dx, dh_prev, dc_prev, parameter grads)."""
    xt = cache[0]
    n_in = params.input_size
    h = params.hidden_size
    w, _ = _stacked(params)
    da, dc_prev = _cell_grads(dh, dc, cache)
    dw = np.outer(da, xt)
    dxt = w.T @ da
    grads = {}
    for row, gate in enumerate(_GATE_ROWS):
        grads[f"W_{gate}"] = dw[row * h : (row + 1) * h]
        grads[f"b_{gate}"] = da[row * h : (row + 1) * h]
    return dxt[:n_in], dxt[n_in:], dc_prev, grads


def lstm_forward(
    inputs: np.ndarray, initial: LSTMState, params: LSTMParams
) -> tuple[list[LSTMState], tuple]:
    """Fold lstm_cell over a (T, n_in) input sequence.

    Returns every intermediate state plus a cache holding the per-step arrays
    the BPTT backward needs.
    """
    params.check()
    xs = np.asarray(inputs, dtype=np.float64)
    if xs.ndim != 2 or xs.shape[0] == 0:
        raise ValueError(f"inputs must be a non-empty (T, n_in) array, got {xs.shape}")
    if xs.shape[1] != params.input_size:
        raise ValueError(
            f"input width {xs.shape[1]} != expected {params.input_size}"
        )
    t_len = xs.shape[0]
    hid = params.hidden_size
    w, b = _stacked(params)
    caches = []
    states = []
    h, c = initial.h, initial.c
    for t in range(t_len):
        xt = np.concatenate([xs[t], h])
        i, f, o, g = _gates(w @ xt + b, hid)
        c_prev = c
        c = f * c + i * g
        tc = np.tanh(c)
        h = o * tc
        caches.append((xt, c_prev, i, f, o, g, c, tc))
        states.append(LSTMState(h, c))
    return states, (caches, w, xs.shape[1])


def lstm_backward(
    dh_out: np.ndarray,
    cache: tuple,
    params: LSTMParams,
    dh_final: np.ndarray | None = None,
    dc_final: np.ndarray | None = None,
) -> tuple[np.ndarray, dict[str, np.ndarray], np.ndarray, np.ndarray]:
    """Full backpropagation through time.

    dh_out is (T, hidden): the loss gradient arriving at each step's hidden
    output. Returns (dinputs (T, n_in), parameter grads, dh0, dc0).
    """
    caches, w, n_in = cache
    t_len = len(caches)
    hid = params.hidden_size
    da_all = np.empty((t_len, 4 * hid))
    dxs = np.empty((t_len, n_in))
    dh = np.zeros(hid) if dh_final is None else dh_final.copy()
    dc = np.zeros(hid) if dc_final is None else dc_final.copy()
    wt = w.T
    for t in range(t_len - 1, -1, -1):
        da, dc = _cell_grads(dh_out[t] + dh, dc, caches[t])
        da_all[t] = da
        dxt = wt @ da
        dxs[t] = dxt[:n_in]
        dh = dxt[n_in:]
    xt_all = np.stack([c[0] for c in caches])  # (T, n_in + hidden)
    dw = da_all.T @ xt_all
    db = da_all.sum(axis=0)
    grads = {}
    for row, gate in enumerate(_GATE_ROWS):
        grads[f"W_{gate}"] = dw[row * hid : (row + 1) * hid]
        grads[f"b_{gate}"] = db[row * hid : (row + 1) * hid]
    return dxs, grads, dh, dc
