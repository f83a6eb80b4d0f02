"""The gesture recognizer: per-frame CNN encoder with gaze-weighted fusion,
an LSTM over time, and a softmax classifier head at every timestep.

Per frame: the 6x21 joint feature grid is reweighted by gaze attention,
passed through two same-padded 1D convolutions with pooling, projected to a
dense feature vector, and fused with a small gaze auxiliary vector through a
dense fusion layer. The LSTM carries context across frames; each hidden state
is classified independently, and sequence-level labels aggregate the final
half of the timesteps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from gesturekit import nn
from gesturekit.rng import SplitMix64
from gesturekit.skeleton import (
    GestureFrame,
    HandSkeleton,
    JOINT_COUNT,
    frame_features,
    mean_palm_bone_length,
)
from gesturekit.synth import GestureClass, GestureSequence

#: Gaze auxiliary vector: gaze-minus-wrist x, y (hand-size normalized) + presence flag.
GAZE_AUX_DIM = 3
FEATURE_CHANNELS = 6

WEIGHT_FORMAT_VERSION = 1


@dataclass(frozen=True)
class ConvSpec:
    in_channels: int
    out_channels: int
    kernel_size: int


@dataclass(frozen=True)
class ModelConfig:
    class_count: int = 8
    conv1: ConvSpec = ConvSpec(FEATURE_CHANNELS, 16, 3)
    conv2: ConvSpec = ConvSpec(16, 32, 3)
    dense_feature: int = 64
    lstm_hidden: int = 64
    dropout_keep: float = 0.8
    gaze_sigma: float = 0.5
    gaze_enabled: bool = True

    def __post_init__(self):
        if self.class_count < 1:
            raise ValueError("class_count must be positive")
        if self.conv1.in_channels != FEATURE_CHANNELS:
            raise ValueError(
                f"conv1 must take the {FEATURE_CHANNELS} feature channels"
            )
        if self.conv2.in_channels != self.conv1.out_channels:
            raise ValueError("conv2 input channels must match conv1 output")
        for spec in (self.conv1, self.conv2):
            if spec.out_channels < 1 or spec.kernel_size < 1:
                raise ValueError("conv sizes must be positive")
            if spec.kernel_size % 2 == 0:
                raise ValueError("conv kernel sizes must be odd")
        if self.dense_feature < 1 or self.lstm_hidden < 1:
            raise ValueError("layer sizes must be positive")
        if not 0.0 < self.dropout_keep <= 1.0:
            raise ValueError("dropout_keep must be in (0, 1]")
        if self.gaze_sigma <= 0:
            raise ValueError("gaze_sigma must be positive")

    @property
    def pooled_len(self) -> int:
        return JOINT_COUNT // 2

    @property
    def flat_dim(self) -> int:
        return self.conv2.out_channels * self.pooled_len

    @property
    def fusion_in(self) -> int:
        return self.dense_feature + GAZE_AUX_DIM

    def to_dict(self) -> dict:
        return {
            "class_count": self.class_count,
            "conv1": _conv_dict(self.conv1),
            "conv2": _conv_dict(self.conv2),
            "dense_feature": self.dense_feature,
            "lstm_hidden": self.lstm_hidden,
            "dropout_keep": self.dropout_keep,
            "gaze_sigma": self.gaze_sigma,
            "gaze_enabled": self.gaze_enabled,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ModelConfig":
        expected = {
            "class_count",
            "conv1",
            "conv2",
            "dense_feature",
            "lstm_hidden",
            "dropout_keep",
            "gaze_sigma",
            "gaze_enabled",
        }
        if set(data) != expected:
            raise ValueError(
                f"bad config keys: unexpected {sorted(set(data) - expected)}, "
                f"missing {sorted(expected - set(data))}"
            )
        return cls(
            class_count=int(data["class_count"]),
            conv1=_conv_from_dict(data["conv1"]),
            conv2=_conv_from_dict(data["conv2"]),
            dense_feature=int(data["dense_feature"]),
            lstm_hidden=int(data["lstm_hidden"]),
            dropout_keep=float(data["dropout_keep"]),
            gaze_sigma=float(data["gaze_sigma"]),
            gaze_enabled=bool(data["gaze_enabled"]),
        )


def _conv_dict(spec: ConvSpec) -> dict:
    return {"in": spec.in_channels, "out": spec.out_channels, "k": spec.kernel_size}


def _conv_from_dict(data: dict) -> ConvSpec:
    if set(data) != {"in", "out", "k"}:
        raise ValueError(f"bad conv spec keys: {sorted(data)}")
    return ConvSpec(int(data["in"]), int(data["out"]), int(data["k"]))


def parameter_shapes(config: ModelConfig) -> list[tuple[str, tuple[int, ...]]]:
    """Canonical parameter order; also the on-disk weight layout."""
    c1, c2 = config.conv1, config.conv2
    hid = config.lstm_hidden
    lstm_in = config.dense_feature + hid
    shapes: list[tuple[str, tuple[int, ...]]] = [
        ("conv1.kernels", (c1.out_channels, c1.in_channels, c1.kernel_size)),
        ("conv1.bias", (c1.out_channels,)),
        ("conv2.kernels", (c2.out_channels, c2.in_channels, c2.kernel_size)),
        ("conv2.bias", (c2.out_channels,)),
        ("dense.weights", (config.dense_feature, config.flat_dim)),
        ("dense.bias", (config.dense_feature,)),
        ("fusion.weights", (config.dense_feature, config.fusion_in)),
        ("fusion.bias", (config.dense_feature,)),
    ]
    for gate in ("i", "f", "g", "o"):
        shapes.append((f"lstm.W_{gate}", (hid, lstm_in)))
        shapes.append((f"lstm.b_{gate}", (hid,)))
    shapes.append(("head.weights", (config.class_count, hid)))
    shapes.append(("head.bias", (config.class_count,)))
    return shapes


def parameter_count(config: ModelConfig) -> int:
    return sum(int(np.prod(shape)) for _, shape in parameter_shapes(config))


@dataclass
class RecognizerModel:
    config: ModelConfig
    params: dict[str, np.ndarray]
    version: int = WEIGHT_FORMAT_VERSION

    def lstm_params(self) -> nn.LSTMParams:
        p = self.params
        return nn.LSTMParams(
            W_i=p["lstm.W_i"], b_i=p["lstm.b_i"],
            W_f=p["lstm.W_f"], b_f=p["lstm.b_f"],
            W_g=p["lstm.W_g"], b_g=p["lstm.b_g"],
            W_o=p["lstm.W_o"], b_o=p["lstm.b_o"],
        )


def _xavier_fans(name: str, shape: tuple[int, ...], config: ModelConfig):
    if name.endswith(".kernels"):
        c_out, c_in, k = shape
        return c_in * k, c_out * k
    if name.startswith("lstm.W"):
        return shape[1], shape[0]
    # dense-style (n_out, n_in)
    return shape[1], shape[0]


def init_model(config: ModelConfig, seed: int) -> RecognizerModel:
    """Seeded Xavier-uniform initialization.

    Weight tensors draw from one SplitMix64 stream in canonical parameter
    order (row-major within a tensor); biases are constants (zeros, except the
    forget-gate bias at 1.0 to keep early memory open) and consume no draws.
    """
    rng = SplitMix64(seed)
    params: dict[str, np.ndarray] = {}
    for name, shape in parameter_shapes(config):
        if name.endswith(".bias") or name.startswith("lstm.b"):
            params[name] = (
                np.ones(shape) if name == "lstm.b_f" else np.zeros(shape)
            )
            continue
        fan_in, fan_out = _xavier_fans(name, shape, config)
        limit = math.sqrt(6.0 / (fan_in + fan_out))
        size = int(np.prod(shape))
        u = rng.uniforms(size).reshape(shape)
        params[name] = (2.0 * u - 1.0) * limit
    return RecognizerModel(config=config, params=params)


# ---------------------------------------------------------------------------
# Gaze attention
# ---------------------------------------------------------------------------


def gaze_attention(
    features: np.ndarray,
    skeleton: HandSkeleton,
    gaze: np.ndarray | None,
    sigma: float,
) -> tuple[np.ndarray, np.ndarray]:
    """Reweight the (6, 21) feature grid by gaze proximity.

    Joint weights are softmax(-d^2 / (2 sigma^2)) over the distances between
    the gaze point and each joint's x-y projection; each joint column is
    scaled by 21 * w_j so uniform weights are the identity. Without a gaze
    point the input is returned untouched with uniform weights.
    """
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    if gaze is None:
        return features, np.full(JOINT_COUNT, 1.0 / JOINT_COUNT)
    d2 = ((skeleton.joints[:, :2] - np.asarray(gaze)) ** 2).sum(axis=1)
    weights = nn.softmax(-d2 / (2.0 * sigma * sigma))
    return features * (JOINT_COUNT * weights), weights


# ---------------------------------------------------------------------------
# Frame batches and the per-frame encoder
# ---------------------------------------------------------------------------


@dataclass
class _FrameBatch:
    feats: np.ndarray  # (T, 6, 21)
    proj: np.ndarray  # (T, 21, 2) joint x-y projections
    wrist: np.ndarray  # (T, 2)
    scale: np.ndarray  # (T,) mean palm-bone length
    gazes: list  # per frame: (2,) array or None


def _batch_from_frames(frames) -> _FrameBatch:
    joints = np.stack([f.skeleton.joints for f in frames])  # (T, 21, 3)
    t_ms = np.array([f.t_ms for f in frames], dtype=np.float64)
    if len(frames) > 1 and not (np.diff(t_ms) > 0).all():
        raise ValueError("frame timestamps must strictly increase")
    palm = joints[:, (1, 5, 9, 13, 17), :] - joints[:, :1, :]
    scale = np.sqrt((palm * palm).sum(axis=2)).mean(axis=1)  # (T,)
    pos = (joints - joints[:, :1, :]) / scale[:, None, None]
    vel = np.zeros_like(joints)
    if len(frames) > 1:
        dt_s = (t_ms[1:] - t_ms[:-1]) / 1000.0
        vel[1:] = (joints[1:] - joints[:-1]) / dt_s[:, None, None]
    feats = np.concatenate(
        [pos.transpose(0, 2, 1), vel.transpose(0, 2, 1)], axis=1
    )
    return _FrameBatch(
        feats=feats,
        proj=joints[:, :, :2],
        wrist=joints[:, 0, :2],
        scale=scale,
        gazes=[f.gaze for f in frames],
    )


def _batch_from_step(prev: GestureFrame | None, cur: GestureFrame) -> _FrameBatch:
    feats = frame_features(prev, cur)[None, :, :]
    return _FrameBatch(
        feats=feats,
        proj=cur.skeleton.joints[None, :, :2],
        wrist=cur.skeleton.joints[None, 0, :2],
        scale=np.array([mean_palm_bone_length(cur.skeleton)]),
        gazes=[cur.gaze],
    )


def _encode(
    model: RecognizerModel, batch: _FrameBatch, training: bool, seed: int
) -> tuple[np.ndarray, tuple]:
    """Per-frame encoder over a whole batch of frames.

    Pipeline: gaze attention -> conv1 -> relu -> maxpool -> conv2 -> relu ->
    flatten -> dense -> relu -> dropout -> concat gaze auxiliary -> fusion
    dense -> relu. Returns (features (T, dense_feature), backward cache).
    """
    cfg = model.config
    p = model.params
    t_len = batch.feats.shape[0]

    aux = np.zeros((t_len, GAZE_AUX_DIM))
    x0 = batch.feats
    present = np.array([g is not None for g in batch.gazes])
    if cfg.gaze_enabled and present.any():
        gz = np.stack(
            [np.zeros(2) if g is None else g for g in batch.gazes]
        )  # (T, 2)
        diff = batch.proj - gz[:, None, :]
        d2 = (diff * diff).sum(axis=2)  # (T, 21)
        weights = nn.softmax(-d2 / (2.0 * cfg.gaze_sigma * cfg.gaze_sigma))
        x0 = batch.feats.copy()
        idx = np.nonzero(present)[0]
        x0[idx] = batch.feats[idx] * (JOINT_COUNT * weights[idx])[:, None, :]
        aux[idx, :2] = (gz[idx] - batch.wrist[idx]) / batch.scale[idx, None]
        aux[idx, 2] = 1.0

    a1, cols1 = nn._conv1d_with_cols(x0, p["conv1.kernels"], p["conv1.bias"])
    r1 = nn.relu(a1)
    pooled, arg = nn.maxpool1d_forward(r1)
    a2, cols2 = nn._conv1d_with_cols(pooled, p["conv2.kernels"], p["conv2.bias"])
    r2 = nn.relu(a2)
    flat = r2.reshape(t_len, cfg.flat_dim)
    d = nn.dense_forward(flat, p["dense.weights"], p["dense.bias"])
    rd = nn.relu(d)
    dropped, mask = nn.dropout(
        rd, nn.DropoutSpec(cfg.dropout_keep, training), seed
    )
    cat = np.concatenate([dropped, aux], axis=1)
    fu = nn.dense_forward(cat, p["fusion.weights"], p["fusion.bias"])
    out = nn.relu(fu)
    cache = (x0, cols1, a1, r1, pooled, arg, cols2, a2, flat, d, mask, cat, fu)
    return out, cache


def _encode_backward(
    model: RecognizerModel, cache: tuple, dout: np.ndarray
) -> dict[str, np.ndarray]:
    cfg = model.config
    p = model.params
    x0, cols1, a1, r1, pooled, arg, cols2, a2, flat, d, mask, cat, fu = cache
    grads: dict[str, np.ndarray] = {}

    dfu = nn.relu_backward(dout, fu)
    dcat, grads["fusion.weights"], grads["fusion.bias"] = nn.dense_backward(
        dfu, cat, p["fusion.weights"]
    )
    ddrop = dcat[:, : cfg.dense_feature]
    drd = nn.dropout_backward(ddrop, mask, cfg.dropout_keep)
    dd = nn.relu_backward(drd, d)
    dflat, grads["dense.weights"], grads["dense.bias"] = nn.dense_backward(
        dd, flat, p["dense.weights"]
    )
    dr2 = dflat.reshape(a2.shape)
    da2 = nn.relu_backward(dr2, a2)
    dpooled, grads["conv2.kernels"], grads["conv2.bias"] = nn.conv1d_backward(
        da2, pooled, p["conv2.kernels"], cols=cols2
    )
    dr1 = nn.maxpool1d_backward(dpooled, arg, JOINT_COUNT)
    da1 = nn.relu_backward(dr1, a1)
    _, grads["conv1.kernels"], grads["conv1.bias"] = nn.conv1d_backward(
        da1, x0, p["conv1.kernels"], cols=cols1
    )
    return grads


def encode_frame(
    model: RecognizerModel,
    prev: GestureFrame | None,
    cur: GestureFrame,
    training: bool = False,
    seed: int = 0,
) -> np.ndarray:
    """Encode a single frame into the fused feature vector the LSTM consumes."""
    out, _ = _encode(model, _batch_from_step(prev, cur), training, seed)
    return out[0]


# ---------------------------------------------------------------------------
# Sequence forward, loss, prediction
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TimestepOutput:
    t_ms: int
    probs: np.ndarray
    top_class: int


@dataclass(frozen=True)
class Prediction:
    label: GestureClass
    confidence: float
    per_timestep: tuple[TimestepOutput, ...]


def _forward(model: RecognizerModel, frames, training: bool, seed: int):
    batch = _batch_from_frames(frames)
    feats, enc_cache = _encode(model, batch, training, seed)
    lstm_params = model.lstm_params()
    states, lstm_cache = nn.lstm_forward(
        feats, nn.zero_state(model.config.lstm_hidden), lstm_params
    )
    hidden = np.stack([s.h for s in states])  # (T, hidden)
    logits = hidden @ model.params["head.weights"].T + model.params["head.bias"]
    probs = nn.softmax(logits)
    return probs, (feats, enc_cache, lstm_params, lstm_cache, hidden, logits)


def _ce_from_logits(logits: np.ndarray, true_class: int) -> np.ndarray:
    """Row-wise -log softmax(z)[true] as log1p(sum_{j!=t} exp(z_j - z_t)).

    Equivalent to the softmax route but computed with relative precision even
    when the true-class probability is close to 1, where log(p) would lose
    all significant digits to rounding.
    """
    diff = logits - logits[:, true_class : true_class + 1]
    others = np.delete(diff, true_class, axis=1)
    m = others.max(axis=1)
    out = np.empty(len(logits))
    low = m < 0
    if low.any():
        out[low] = np.log1p(np.exp(others[low]).sum(axis=1))
    if (~low).any():
        hi = ~low
        mh = m[hi]
        out[hi] = mh + np.log(
            np.exp(-mh) + np.exp(others[hi] - mh[:, None]).sum(axis=1)
        )
    return out


def aggregation_window(t_len: int) -> int:
    """Timesteps aggregated for sequence decisions: the final ceil(T/2)."""
    return (t_len + 1) // 2


def forward_sequence(
    model: RecognizerModel,
    seq: GestureSequence,
    training: bool = False,
    seed: int = 0,
) -> list[TimestepOutput]:
    """Classify every timestep of a sequence from a zero initial LSTM state."""
    if len(seq.frames) < 2:
        raise ValueError("sequence must have at least 2 frames")
    probs, _ = _forward(model, seq.frames, training, seed)
    return [
        TimestepOutput(f.t_ms, probs[t], int(np.argmax(probs[t])))
        for t, f in enumerate(seq.frames)
    ]


def sequence_loss(
    model: RecognizerModel,
    frames,
    true_class: int,
    training: bool = False,
    seed: int = 0,
    need_grads: bool = True,
):
    """Mean cross-entropy over the final aggregation window of a sequence.

    Returns (loss, grads-or-None, probs). The gradient covers every model
    parameter, with BPTT through the LSTM; timesteps outside the window feed
    gradients only through the recurrent state.
    """
    probs, ctx = _forward(model, frames, training, seed)
    t_len = probs.shape[0]
    window = aggregation_window(t_len)
    start = t_len - window
    win_probs = probs[start:]
    loss = float(_ce_from_logits(ctx[5][start:], true_class).mean())
    if not need_grads:
        return loss, None, probs
    feats, enc_cache, lstm_params, lstm_cache, hidden, _ = ctx
    dlogits = np.zeros_like(probs)
    dlogits[start:] = win_probs / window
    dlogits[start:, true_class] -= 1.0 / window
    grads: dict[str, np.ndarray] = {}
    grads["head.weights"] = dlogits.T @ hidden
    grads["head.bias"] = dlogits.sum(axis=0)
    dhidden = dlogits @ model.params["head.weights"]
    dfeats, lstm_grads, _, _ = nn.lstm_backward(dhidden, lstm_cache, lstm_params)
    for gate in ("i", "f", "g", "o"):
        grads[f"lstm.W_{gate}"] = lstm_grads[f"W_{gate}"]
        grads[f"lstm.b_{gate}"] = lstm_grads[f"b_{gate}"]
    grads.update(_encode_backward(model, enc_cache, dfeats))
    return loss, grads, probs


def predict(model: RecognizerModel, seq: GestureSequence) -> Prediction:
    """Sequence label = argmax of mean probabilities over the final half of
    the timesteps; ties break toward the lower class id."""
    outputs = forward_sequence(model, seq, training=False)
    window = aggregation_window(len(outputs))
    mean_probs = np.mean([o.probs for o in outputs[-window:]], axis=0)
    label = int(np.argmax(mean_probs))
    return Prediction(
        label=GestureClass(label),
        confidence=float(mean_probs[label]),
        per_timestep=tuple(outputs),
    )
