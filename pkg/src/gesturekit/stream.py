"""Streaming recognition sessions over stdio or WebSocket.

Each session owns the recurrent state and the previous frame, so frames are
classified as they arrive. Latency is measured server-side from message
decode to reply assembly (the value must sit inside the encoded reply), and
per-frame statistics accumulate on the session.

Wire schema (JSON text messages, newline-delimited on stdio):
  client -> server: {"type":"frame","t":ms,"joints":[[x,y,z] x21],"gaze":[gx,gy]|null}
                    {"type":"reset"}
  server -> client: {"type":"hello","classes":[names],"model_version":int}
                    {"type":"probs","t":ms,"probs":[C],"label":name,"latency_us":int}
                    {"type":"error","code":str,"detail":str}
"""

from __future__ import annotations

import asyncio
import json
import logging
import sys
import time
from pathlib import Path
from typing import IO, Sequence

import numpy as np

from gesturekit import nn
from gesturekit.dataset import load_dataset
from gesturekit.model import RecognizerModel, encode_frame
from gesturekit.skeleton import GestureFrame, HandSkeleton, validate
from gesturekit.synth import CLASS_NAMES, GestureClass, GestureSequence
from gesturekit.weights_io import load_weights

log = logging.getLogger(__name__)

LATENCY_BOUNDARY = "message decode to reply assembly (encoding excluded)"


class LatencyStats:
    """Per-frame latency accumulator in microseconds."""

    def __init__(self):
        self._us: list[int] = []

    def record(self, us: int) -> None:
        self._us.append(us)

    @property
    def count(self) -> int:
        return len(self._us)

    def percentile(self, q: float) -> float:
        if not self._us:
            return 0.0
        return float(np.percentile(self._us, q))

    def summary(self) -> dict:
        return {
            "count": self.count,
            "p50_us": self.percentile(50),
            "p99_us": self.percentile(99),
            "max_us": float(max(self._us)) if self._us else 0.0,
        }


class StreamSession:
    """One client's recurrent state plus latency accounting."""

    def __init__(self, model: RecognizerModel, session_id: str = "session"):
        self.model = model
        self.session_id = session_id
        self.stats = LatencyStats()
        self.frames_seen = 0
        self.state = nn.zero_state(model.config.lstm_hidden)
        self.prev: GestureFrame | None = None

    def reset(self) -> None:
        self.state = nn.zero_state(self.model.config.lstm_hidden)
        self.prev = None


def hello_message(model: RecognizerModel) -> dict:
    return {
        "type": "hello",
        "classes": list(CLASS_NAMES[: model.config.class_count]),
        "model_version": model.version,
    }


def _error(code: str, detail: str) -> dict:
    return {"type": "error", "code": code, "detail": detail}


def session_step(session: StreamSession, msg: dict, t0_ns: int | None = None) -> dict:
    """Classify one frame message; errors leave the session state untouched."""
    if t0_ns is None:
        t0_ns = time.perf_counter_ns()
    try:
        t = int(msg["t"])
        joints = np.asarray(msg["joints"], dtype=np.float64)
        gaze = msg.get("gaze")
        skeleton = HandSkeleton(joints)
        frame = GestureFrame(t, skeleton, None if gaze is None else gaze)
    except (KeyError, TypeError, ValueError) as exc:
        return _error("bad_frame", str(exc))
    result = validate(skeleton)
    if not result.ok:
        return _error("invalid_skeleton", "; ".join(result.violations))
    if session.prev is not None and t <= session.prev.t_ms:
        return _error(
            "non_monotonic_t",
            f"t {t} is not greater than previous frame t {session.prev.t_ms}",
        )
    vec = encode_frame(session.model, session.prev, frame, training=False)
    state, _ = nn.lstm_cell(vec, session.state, session.model.lstm_params())
    logits = (
        state.h @ session.model.params["head.weights"].T
        + session.model.params["head.bias"]
    )
    probs = nn.softmax(logits)
    session.state = state
    session.prev = frame
    session.frames_seen += 1
    latency_us = (time.perf_counter_ns() - t0_ns) // 1000
    session.stats.record(int(latency_us))
    return {
        "type": "probs",
        "t": t,
        "probs": probs.tolist(),
        "label": GestureClass(int(np.argmax(probs))).label,
        "latency_us": int(latency_us),
    }


def handle_message(session: StreamSession, text: str) -> str | None:
    """Decode one wire message and produce the encoded reply (None for reset)."""
    t0_ns = time.perf_counter_ns()
    try:
        msg = json.loads(text)
    except json.JSONDecodeError as exc:
        return json.dumps(_error("bad_message", f"not valid JSON: {exc}"))
    if not isinstance(msg, dict) or "type" not in msg:
        return json.dumps(_error("bad_message", "message must be an object with a type"))
    mtype = msg["type"]
    if mtype == "reset":
        session.reset()
        log.debug("session %s reset", session.session_id)
        return None
    if mtype == "frame":
        return json.dumps(session_step(session, msg, t0_ns))
    return json.dumps(_error("bad_message", f"unknown message type {mtype!r}"))


# ---------------------------------------------------------------------------
# Transports
# ---------------------------------------------------------------------------


def serve_stdio(
    model: RecognizerModel,
    in_stream: IO[str] | None = None,
    out_stream: IO[str] | None = None,
) -> None:
    """Newline-delimited JSON on stdin/stdout; one implicit session."""
    inp = sys.stdin if in_stream is None else in_stream
    out = sys.stdout if out_stream is None else out_stream
    session = StreamSession(model, session_id="stdio")
    out.write(json.dumps(hello_message(model)) + "\n")
    out.flush()
    for line in inp:
        line = line.strip()
        if not line:
            continue
        reply = handle_message(session, line)
        if reply is not None:
            out.write(reply + "\n")
            out.flush()
    log.info("stdio stream closed after %d frames", session.frames_seen)


async def serve_websocket_async(model: RecognizerModel, host: str, port: int):
    """Runs a WebSocket server until the task is cancelled."""
    import websockets

    counter = 0

    async def handler(conn):
        nonlocal counter
        counter += 1
        session = StreamSession(model, session_id=f"ws-{counter}")
        log.info("session %s connected", session.session_id)
        await conn.send(json.dumps(hello_message(model)))
        async for message in conn:
            reply = handle_message(session, message)
            if reply is not None:
                await conn.send(reply)
        log.info(
            "session %s closed after %d frames", session.session_id, session.frames_seen
        )

    async with websockets.serve(handler, host, port):
        log.info("listening on ws://%s:%d", host, port)
        await asyncio.get_running_loop().create_future()


def parse_addr(addr: str) -> tuple[str, int]:
    host, sep, port = addr.rpartition(":")
    if not sep or not port.isdigit():
        raise ValueError(f"address must be host:port, got {addr!r}")
    return host or "127.0.0.1", int(port)


def serve(
    model_path: str | Path,
    addr: str = "127.0.0.1:8765",
    transport: str = "websocket",
) -> None:
    """Load a weight file and serve it until interrupted."""
    model = load_weights(model_path)
    if transport == "stdio":
        serve_stdio(model)
    elif transport == "websocket":
        host, port = parse_addr(addr)
        asyncio.run(serve_websocket_async(model, host, port))
    else:
        raise ValueError(f"unknown transport {transport!r}")


# ---------------------------------------------------------------------------
# Benchmarking
# ---------------------------------------------------------------------------


def frame_message(frame: GestureFrame) -> dict:
    return {
        "type": "frame",
        "t": frame.t_ms,
        "joints": frame.skeleton.joints.tolist(),
        "gaze": None if frame.gaze is None else frame.gaze.tolist(),
    }


def bench(
    model: RecognizerModel | str | Path,
    dataset: Sequence[GestureSequence] | str | Path,
    reps: int = 1,
    return_latencies: bool = False,
):
    """Replay every frame through the session pipeline in-process.

    Each sequence runs in a fresh session (reset semantics); the reported
    latency covers decode -> reply assembly per frame, matching the serving
    path. The final reply label of each sequence is recorded so repeated runs
    can be checked for identical outputs.
    """
    if not isinstance(model, RecognizerModel):
        model = load_weights(model)
    if isinstance(dataset, (str, Path)):
        dataset = load_dataset(dataset)
    if reps < 1:
        raise ValueError("reps must be >= 1")
    encoded = [
        [json.dumps(frame_message(f)) for f in seq.frames] for seq in dataset
    ]
    stats = LatencyStats()
    labels_per_rep: list[list[str]] = []
    started = time.perf_counter()
    for _ in range(reps):
        labels = []
        for lines in encoded:
            session = StreamSession(model, session_id="bench")
            last = None
            for line in lines:
                reply = json.loads(handle_message(session, line))
                if reply["type"] != "probs":
                    raise RuntimeError(f"bench hit an error reply: {reply}")
                last = reply
            stats._us.extend(session.stats._us)
            labels.append(last["label"])
        labels_per_rep.append(labels)
    elapsed = time.perf_counter() - started
    total_frames = sum(len(lines) for lines in encoded) * reps
    report = {
        "sequences": len(dataset),
        "frames_per_rep": sum(len(lines) for lines in encoded),
        "reps": reps,
        "latency_boundary": LATENCY_BOUNDARY,
        "frames_per_second": total_frames / elapsed if elapsed > 0 else float("inf"),
        "final_labels": labels_per_rep[0],
        "labels_identical_across_reps": all(
            labels == labels_per_rep[0] for labels in labels_per_rep
        ),
    }
    report.update(stats.summary())
    if return_latencies:
        return report, list(stats._us)
    return report
