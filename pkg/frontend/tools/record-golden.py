#!/usr/bin/env python3
"""Record the frontend test fixtures from the real backend.

Writes into frontend/tests/fixtures/:
  golden_model.gkw        small fixed-seed model served during recording
  golden_session.jsonl    wire transcript: {"dir":"in"|"out","msg":...} lines
  golden_labels.json      the stdio client's label sequence (one per reply)
  kinematics_golden.json  hand poses for curl vectors, from the generator

Run from the repository root after installing the package:
    python3 frontend/tools/record-golden.py
"""

import json
import subprocess
import sys
from pathlib import Path

from gesturekit.model import ConvSpec, ModelConfig, init_model
from gesturekit.stream import frame_message
from gesturekit.synth import GenConfig, GestureClass, generate_sequence, pose_from_curls, synth_gaze
from gesturekit.weights_io import save_weights

FIXTURES = Path(__file__).resolve().parent.parent / "tests" / "fixtures"

MODEL_CONFIG = ModelConfig(
    class_count=8,
    conv1=ConvSpec(6, 4, 3),
    conv2=ConvSpec(4, 6, 3),
    dense_feature=12,
    lstm_hidden=12,
    dropout_keep=1.0,
)
MODEL_SEED = 5


def record_session(model_path: Path) -> tuple[list[dict], list[str]]:
    seq_a = synth_gaze(
        generate_sequence(GestureClass.SWIPE_LEFT, GenConfig(frames_per_sequence=12, seed=21), 421),
        422,
    )
    seq_b = synth_gaze(
        generate_sequence(GestureClass.FIST, GenConfig(frames_per_sequence=12, seed=22), 431),
        432,
    )
    sent: list[dict] = []
    lines = []
    for frame in seq_a.frames:
        msg = frame_message(frame)
        sent.append(msg)
        lines.append(json.dumps(msg))
    sent.append({"type": "reset"})
    lines.append(json.dumps({"type": "reset"}))
    for frame in seq_b.frames:
        msg = frame_message(frame)
        sent.append(msg)
        lines.append(json.dumps(msg))

    proc = subprocess.run(
        [sys.executable, "-m", "gesturekit.cli", "serve", "--model", str(model_path), "--transport", "stdio"],
        input="\n".join(lines) + "\n",
        capture_output=True,
        text=True,
        timeout=300,
        check=True,
    )
    replies = [json.loads(line) for line in proc.stdout.splitlines()]
    hello, replies = replies[0], replies[1:]
    assert hello["type"] == "hello", hello
    assert all(r["type"] == "probs" for r in replies), replies

    transcript = [{"dir": "out", "msg": hello}]
    reply_iter = iter(replies)
    for msg in sent:
        transcript.append({"dir": "in", "msg": msg})
        if msg["type"] == "frame":
            transcript.append({"dir": "out", "msg": next(reply_iter)})
    labels = [r["label"] for r in replies]
    return transcript, labels


def kinematics_cases() -> list[dict]:
    cases = []
    for curls in (
        (0.0, 0.0, 0.0, 0.0, 0.0),
        (1.0, 1.0, 1.0, 1.0, 1.0),
        (0.55, 0.6, 0.15, 0.15, 0.15),
        (0.4, 0.4, 0.4, 0.4, 0.4),
        (0.3, 0.85, 0.1, 0.65, 0.95),
    ):
        cases.append(
            {"curls": list(curls), "joints": pose_from_curls(curls).joints.tolist()}
        )
    return cases


def main() -> None:
    FIXTURES.mkdir(parents=True, exist_ok=True)
    model_path = FIXTURES / "golden_model.gkw"
    save_weights(init_model(MODEL_CONFIG, MODEL_SEED), model_path)

    transcript, labels = record_session(model_path)
    with open(FIXTURES / "golden_session.jsonl", "w", encoding="utf-8") as fh:
        for entry in transcript:
            fh.write(json.dumps(entry, separators=(",", ":")) + "\n")
    with open(FIXTURES / "golden_labels.json", "w", encoding="utf-8") as fh:
        json.dump(labels, fh, separators=(",", ":"))
        fh.write("\n")
    with open(FIXTURES / "kinematics_golden.json", "w", encoding="utf-8") as fh:
        json.dump(kinematics_cases(), fh)
        fh.write("\n")
    print(f"fixtures written to {FIXTURES} ({len(transcript)} transcript entries, "
          f"{len(labels)} labels)")


if __name__ == "__main__":
    main()
