"""Acceptance suite: one test per release criterion, each printing a
PASS/FAIL line (run with -s to see them).

The gradient-fidelity harness places every checked instance at a low-loss,
kink-free operating point: central differences at h=1e-6 resolve a gradient
only down to eps*|loss|/(2h) in absolute terms, so small losses are what keep
the comparison meaningful over the 1e-8 relative-error floor. Bugs in any
backward pass still surface as O(1) relative errors.
"""

import io
import json
import math
import time
from dataclasses import replace

import numpy as np
import numpy.testing as npt
import pytest

from gesturekit import nn
from gesturekit.cli import main
from gesturekit.gradcheck import gradient_check
from gesturekit.model import (
    ConvSpec,
    ModelConfig,
    RecognizerModel,
    forward_sequence,
    init_model,
    parameter_shapes,
    sequence_loss,
)
from gesturekit.rng import SplitMix64, mix64
from gesturekit.skeleton import RigidTransform, rotation_about
from gesturekit.stream import StreamSession, bench, frame_message, handle_message
from gesturekit.synth import (
    GenConfig,
    GestureClass,
    generate_dataset,
    generate_sequence,
    synth_gaze,
    transform_sequence,
)
from gesturekit.training import TrainConfig, evaluate, split, train

CANONICAL = GenConfig(frames_per_sequence=30, frame_interval_ms=33, noise_std=0.02, seed=42)


def report(name, ok, detail):
    print(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
    assert ok, f"{name}: {detail}"


@pytest.fixture(scope="session")
def canonical_corpus():
    return generate_dataset(125, CANONICAL)


@pytest.fixture(scope="session")
def trained(canonical_corpus):
    """Default-config training run on the canonical corpus, timed end to end."""
    started = time.perf_counter()
    corpus = generate_dataset(125, CANONICAL)  # timed together with training
    config = TrainConfig()
    train_set, val_set = split(corpus, 0.2, config.seed)
    model = init_model(ModelConfig(), mix64(config.seed, 0x494E4954))
    trained_model, metrics = train(model, train_set, val_set, config)
    elapsed = time.perf_counter() - started
    return {
        "model": trained_model,
        "metrics": metrics,
        "val_set": val_set,
        "elapsed_s": elapsed,
    }


# ---------------------------------------------------------------------------
# Criterion 1: gradient fidelity
# ---------------------------------------------------------------------------


def stable_ce(logits, true_class):
    """-log softmax(z)[true] via log1p, exact even at tiny losses."""
    diff = np.delete(logits - logits[true_class], true_class)
    m = diff.max()
    if m < 0:
        return float(np.log1p(np.exp(diff).sum()))
    return float(m + np.log(np.exp(-m) + np.exp(diff - m).sum()))


def uniform(rng, shape, scale):
    return (2.0 * rng.uniforms(int(np.prod(shape))).reshape(shape) - 1.0) * scale


def check_dense_softmax(seed):
    rng = SplitMix64(seed)
    # inputs bounded away from zero keep every weight gradient resolvable
    x = np.sign(uniform(rng, (6,), 1.0)) * (0.5 + rng.uniforms(6))
    target = int(rng.below(3))
    params = {"w": uniform(rng, (3, 6), 0.8), "b": uniform(rng, (3,), 0.3)}
    params["b"][target] += 14.0  # low-loss operating point

    def loss_fn(p, need_grads):
        logits = nn.dense_forward(x, p["w"], p["b"])
        loss = stable_ce(logits, target)
        if not need_grads:
            return loss, None
        dlogits = nn.softmax(logits)
        dlogits[target] -= 1.0
        _, dw, db = nn.dense_backward(dlogits, x, params["w"])
        return loss, {"w": dw, "b": db}

    return gradient_check(loss_fn, params)


def check_conv_pool(seed):
    rng = SplitMix64(seed)
    x = uniform(rng, (2, 9), 1.0)
    params = {"k": uniform(rng, (3, 2, 3), 0.7), "b": uniform(rng, (3,), 0.3)}
    scale = 1e-4  # small quadratic loss keeps the differences exact

    def loss_fn(p, need_grads):
        a = nn.conv1d_forward(x, p["k"], p["b"])
        r = nn.relu(a)
        out, arg = nn.maxpool1d_forward(r)
        loss = scale * float((out**2).sum()) / 2
        if not need_grads:
            return loss, None
        dr = nn.maxpool1d_backward(scale * out, arg, x.shape[-1])
        da = nn.relu_backward(dr, a)
        _, dk, db = nn.conv1d_backward(da, x, p["k"])
        return loss, {"k": dk, "b": db}

    # re-sample any instance where a relu or pool decision sits near its kink
    a = nn.conv1d_forward(x, params["k"], params["b"])
    if np.abs(a).min() < 1e-4 or pool_tie_gap(nn.relu(a)) < 1e-4:
        return check_conv_pool(seed + 10_000)
    return gradient_check(loss_fn, params)


def pool_tie_gap(r):
    """Smallest live pooling-pair gap; hard-zero pairs are locally constant."""
    pairs = r[..., : 2 * (r.shape[-1] // 2)].reshape(*r.shape[:-1], -1, 2)
    gap = np.abs(pairs[..., 0] - pairs[..., 1])
    live = pairs.max(axis=-1) > 0
    return gap[live].min() if live.any() else np.inf


def lstm_toy_params(rng, n_in, hidden):
    d = n_in + hidden
    out = {}
    for gate in ("i", "f", "g", "o"):
        out[f"W_{gate}"] = uniform(rng, (hidden, d), 0.6)
        out[f"b_{gate}"] = uniform(rng, (hidden,), 0.3)
    return out


def check_lstm(seed):
    rng = SplitMix64(seed)
    xs = uniform(rng, (5, 3), 1.2)
    params = lstm_toy_params(rng, 3, 4)
    scale = 1e-4

    def loss_fn(d, need_grads):
        lp = nn.LSTMParams(**d)
        states, cache = nn.lstm_forward(xs, nn.zero_state(4), lp)
        hidden = np.stack([s.h for s in states])
        loss = scale * float((hidden**2).sum()) / 2
        if not need_grads:
            return loss, None
        _, grads, _, _ = nn.lstm_backward(scale * hidden, cache, lp)
        return loss, grads

    return gradient_check(loss_fn, params)


FULL_TOY = ModelConfig(
    class_count=4,
    conv1=ConvSpec(6, 3, 3),
    conv2=ConvSpec(3, 4, 3),
    dense_feature=8,
    lstm_hidden=8,
    dropout_keep=1.0,  # gradient checking holds dropout in inference mode
)


def full_toy_instance(seed):
    rng = SplitMix64(seed)
    target = int(rng.below(FULL_TOY.class_count))
    params = {}
    for name, shape in parameter_shapes(FULL_TOY):
        is_bias = name.endswith(".bias") or name.startswith("lstm.b")
        params[name] = uniform(rng, shape, 0.25 if is_bias else 0.7)
        if name == "lstm.b_f":
            params[name] = params[name] + 0.5
    params["head.bias"][target] += 12.0  # low-loss operating point
    seq = synth_gaze(
        generate_sequence(
            GestureClass(seed % 8),
            GenConfig(frames_per_sequence=3, seed=seed),
            seed * 13 + 5,
        ),
        seed * 17 + 3,
    )
    return params, seq, target


def full_toy_kink_distance(params, seq):
    from gesturekit.model import _batch_from_frames, _encode

    model = RecognizerModel(FULL_TOY, params)
    _, cache = _encode(model, _batch_from_frames(seq.frames), False, 0)
    _, _, a1, r1, _, _, _, a2, _, d, _, _, fu = cache
    return min(
        np.abs(a1).min(),
        np.abs(a2).min(),
        np.abs(d).min(),
        np.abs(fu).min(),
        pool_tie_gap(r1),
    )


def check_full_model(seed):
    params, seq, target = full_toy_instance(seed)
    if full_toy_kink_distance(params, seq) < 1e-4:
        return check_full_model(seed + 20_000)  # re-sample near a kink

    def loss_fn(p, need_grads):
        mm = RecognizerModel(FULL_TOY, p)
        loss, grads, _ = sequence_loss(
            mm, seq.frames, target, training=False, need_grads=need_grads
        )
        return loss, grads

    return gradient_check(loss_fn, params)


def test_criterion_gradient_fidelity():
    started = time.perf_counter()
    seeds = range(20)
    results = {
        "dense+softmax": (max(check_dense_softmax(s) for s in seeds), 1e-7),
        "conv+pool": (max(check_conv_pool(s) for s in seeds), 1e-4),
        "lstm-5step": (max(check_lstm(s) for s in seeds), 1e-4),
        "full-recognizer": (max(check_full_model(s) for s in seeds), 1e-4),
    }
    elapsed = time.perf_counter() - started
    ok = all(err < tol for err, tol in results.values()) and elapsed < 60.0
    detail = ", ".join(
        f"{name} max_err {err:.2e} (tol {tol:g})" for name, (err, tol) in results.items()
    )
    report("gradient fidelity", ok, f"{detail}; runtime {elapsed:.1f}s < 60s")


# ---------------------------------------------------------------------------
# Criterion 2: accuracy proxy on the synthetic corpus
# ---------------------------------------------------------------------------


def test_criterion_accuracy_proxy(trained):
    accuracy = trained["metrics"].final.accuracy
    elapsed = trained["elapsed_s"]
    ok = accuracy >= 0.95 and elapsed < 300.0
    report(
        "accuracy proxy",
        ok,
        f"held-out accuracy {accuracy:.4f} >= 0.95; "
        f"gen+train runtime {elapsed:.0f}s < 300s",
    )


# ---------------------------------------------------------------------------
# Criterion 3: latency budget
# ---------------------------------------------------------------------------


def test_criterion_latency_budget(canonical_corpus):
    model = init_model(ModelConfig(), seed=100)  # weights do not affect latency
    result = bench(model, canonical_corpus, reps=1)
    p50_ms = result["p50_us"] / 1000.0
    p99_ms = result["p99_us"] / 1000.0
    ok = p99_ms < 120.0 and p50_ms < 10.0
    report(
        "latency budget",
        ok,
        f"per-frame p50 {p50_ms:.2f}ms < 10ms, p99 {p99_ms:.2f}ms < 120ms "
        f"({result['count']} frames)",
    )


# ---------------------------------------------------------------------------
# Criterion 4: dropout statistics
# ---------------------------------------------------------------------------


def test_criterion_dropout_statistics():
    rng = SplitMix64(77)
    x = 0.5 + rng.uniforms(8)
    spec = nn.DropoutSpec(0.5, training=True)
    acc = np.zeros_like(x)
    n = 100_000
    for seed in range(n):
        out, _ = nn.dropout(x, spec, seed)
        acc += out
    mean = acc / n
    rel = np.abs(mean - x) / x
    inference, mask = nn.dropout(x, nn.DropoutSpec(0.5, training=False), 0)
    identity = inference is x and mask is None
    ok = rel.max() < 0.01 and identity
    report(
        "dropout statistics",
        ok,
        f"max elementwise deviation {rel.max() * 100:.3f}% < 1% over {n} masks; "
        f"inference bitwise identity: {identity}",
    )


# ---------------------------------------------------------------------------
# Criterion 5: stream/batch equivalence
# ---------------------------------------------------------------------------


def test_criterion_stream_batch_equivalence():
    worst = 0.0
    checked = 0
    for i in range(100):
        config = ModelConfig(
            conv1=ConvSpec(6, 4, 3),
            conv2=ConvSpec(4, 6, 3),
            dense_feature=10,
            lstm_hidden=10,
            dropout_keep=1.0,
        )
        model = init_model(config, seed=1000 + i)
        frames = 4 + (i % 7)
        seq = synth_gaze(
            generate_sequence(
                GestureClass(i % 8), GenConfig(frames_per_sequence=frames, seed=i), i
            ),
            i + 1,
        )
        batch = forward_sequence(model, seq)
        session = StreamSession(model)
        for t, frame in enumerate(seq.frames):
            reply = json.loads(handle_message(session, json.dumps(frame_message(frame))))
            assert reply["type"] == "probs"
            worst = max(worst, np.abs(np.array(reply["probs"]) - batch[t].probs).max())
            checked += 1
    ok = worst < 1e-12
    report(
        "stream/batch equivalence",
        ok,
        f"max per-step probability difference {worst:.2e} < 1e-12 "
        f"over 100 sequences ({checked} steps)",
    )


# ---------------------------------------------------------------------------
# Criterion 6: CLI determinism
# ---------------------------------------------------------------------------


def test_criterion_cli_determinism(tmp_path, capsys):
    def run(args):
        code = main(args)
        out = capsys.readouterr().out
        assert code == 0, args
        return out

    config_path = tmp_path / "train.json"
    config_path.write_text(
        json.dumps({"epochs": 2, "batch_size": 8, "seed": 5, "shuffle": True})
    )
    artifacts = {}
    for tag in ("a", "b"):
        data = tmp_path / f"data_{tag}.jsonl"
        model = tmp_path / f"model_{tag}.gkw"
        metrics = tmp_path / f"metrics_{tag}.jsonl"
        run(["gen", "--per-class", "3", "--frames", "8", "--seed", "9",
             "--out", str(data)])
        run(["train", "--data", str(data), "--config", str(config_path),
             "--val-fraction", "0.34", "--out-model", str(model),
             "--metrics", str(metrics), "--no-figures"])
        eval_out = run(["eval", "--model", str(model), "--data", str(data)])
        artifacts[tag] = (
            data.read_bytes(),
            model.read_bytes(),
            metrics.read_bytes(),
            eval_out,
        )
    names = ("dataset", "weights", "metrics", "eval stdout")
    same = [a == b for a, b in zip(artifacts["a"], artifacts["b"])]
    ok = all(same)
    report(
        "determinism",
        ok,
        "byte-identical across two runs: "
        + ", ".join(f"{n}={s}" for n, s in zip(names, same)),
    )


# ---------------------------------------------------------------------------
# Criterion 7: augmentation robustness
# ---------------------------------------------------------------------------


def test_criterion_augmentation_robustness(trained):
    model = trained["model"]
    val_set = trained["val_set"]
    plain = evaluate(model, val_set).accuracy
    rotation = RigidTransform(rotation_about((0.0, 0.0, 1.0), 0.3), np.zeros(3), 1.0)
    rotated = [transform_sequence(seq, rotation) for seq in val_set]
    tilted = evaluate(model, rotated).accuracy
    drop = plain - tilted
    ok = drop <= 0.03 + 1e-9
    report(
        "augmentation robustness",
        ok,
        f"accuracy {plain:.4f} unrotated vs {tilted:.4f} rotated 0.3 rad "
        f"(drop {drop * 100:.2f}pp <= 3pp)",
    )


# ---------------------------------------------------------------------------
# Criterion 8: gaze-identity reduction
# ---------------------------------------------------------------------------


def test_criterion_gaze_identity_reduction():
    sizes = ((4, 6, 10), (6, 8, 12), (8, 12, 16), (16, 32, 64))
    mismatches = 0
    for i in range(100):
        c1, c2, width = sizes[i % len(sizes)]
        config = ModelConfig(
            conv1=ConvSpec(6, c1, 3),
            conv2=ConvSpec(c1, c2, 3),
            dense_feature=width,
            lstm_hidden=width,
            dropout_keep=1.0,
            gaze_enabled=True,
        )
        params = init_model(config, seed=3000 + i).params
        enabled = RecognizerModel(config, params)
        disabled = RecognizerModel(replace(config, gaze_enabled=False), params)
        seq = generate_sequence(
            GestureClass(i % 8),
            GenConfig(frames_per_sequence=4 + (i % 5), seed=i),
            i * 3 + 1,
        )  # no gaze points
        out_e = forward_sequence(enabled, seq)
        out_d = forward_sequence(disabled, seq)
        for a, b in zip(out_e, out_d):
            if a.probs.tobytes() != b.probs.tobytes():
                mismatches += 1
    ok = mismatches == 0
    report(
        "gaze-identity reduction",
        ok,
        f"{mismatches} bitwise mismatches over 100 random model/sequence pairs",
    )
