"""Gesture corpus interchange: one JSON object per line, UTF-8, trailing newline.

Numbers are written with Python's shortest round-trip float repr, so
parse(serialize(x)) reproduces every coordinate bit-for-bit. Seeds are strings
because a uint64 does not survive a float-backed JSON number.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import IO, Iterable

from gesturekit.skeleton import GestureFrame, HandSkeleton
from gesturekit.synth import GestureClass, GestureSequence, Provenance


def sequence_to_record(seq: GestureSequence) -> dict:
    return {
        "label": seq.label.label,
        "class_id": int(seq.label),
        "provenance": {
            "generator_version": seq.provenance.generator_version,
            "seed": str(seq.provenance.seed),
            "augmented": seq.provenance.augmented,
        },
        "frames": [
            {
                "t_ms": f.t_ms,
                "joints": f.skeleton.joints.tolist(),
                "gaze": None if f.gaze is None else f.gaze.tolist(),
            }
            for f in seq.frames
        ],
    }


def record_to_sequence(record: dict) -> GestureSequence:
    label = GestureClass.from_label(record["label"])
    if int(record["class_id"]) != int(label):
        raise ValueError(
            f"class_id {record['class_id']} does not match label {record['label']!r}"
        )
    prov = record["provenance"]
    frames = tuple(
        GestureFrame(
            t_ms=int(f["t_ms"]),
            skeleton=HandSkeleton(f["joints"]),
            gaze=f.get("gaze"),
        )
        for f in record["frames"]
    )
    return GestureSequence(
        label=label,
        frames=frames,
        provenance=Provenance(
            generator_version=str(prov["generator_version"]),
            seed=int(prov["seed"]),
            augmented=bool(prov["augmented"]),
        ),
    )


def dump_sequence(seq: GestureSequence) -> str:
    return json.dumps(sequence_to_record(seq), separators=(",", ":"))


def parse_sequence(line: str) -> GestureSequence:
    return record_to_sequence(json.loads(line))


def save_dataset(seqs: Iterable[GestureSequence], dest: str | Path | IO[str]) -> None:
    if hasattr(dest, "write"):
        for seq in seqs:
            dest.write(dump_sequence(seq))
            dest.write("\n")
        return
    with open(dest, "w", encoding="utf-8", newline="\n") as fh:
        save_dataset(seqs, fh)


def load_dataset(src: str | Path | IO[str]) -> list[GestureSequence]:
    if hasattr(src, "read"):
        lines = src
        return _read_lines(lines, "<stream>")
    with open(src, "r", encoding="utf-8") as fh:
        return _read_lines(fh, str(src))


def _read_lines(lines: Iterable[str], origin: str) -> list[GestureSequence]:
    out = []
    for n, line in enumerate(lines, start=1):
        line = line.strip()
        if not line:
            continue
        try:
            out.append(parse_sequence(line))
        except (KeyError, TypeError, ValueError, json.JSONDecodeError) as exc:
            raise ValueError(f"{origin}:{n}: bad sequence record: {exc}") from exc
    return out
