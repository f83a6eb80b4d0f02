import asyncio
import io
import json

import numpy as np
import numpy.testing as npt
import pytest

from gesturekit.model import ConvSpec, ModelConfig, forward_sequence, init_model
from gesturekit.stream import (
    LatencyStats,
    StreamSession,
    bench,
    frame_message,
    handle_message,
    hello_message,
    parse_addr,
    serve_stdio,
    serve_websocket_async,
)
from gesturekit.synth import GenConfig, GestureClass, generate_sequence, synth_gaze
from gesturekit.weights_io import save_weights

TOY = ModelConfig(
    class_count=8,
    conv1=ConvSpec(6, 4, 3),
    conv2=ConvSpec(4, 6, 3),
    dense_feature=12,
    lstm_hidden=12,
    dropout_keep=1.0,
)


@pytest.fixture(scope="module")
def model():
    return init_model(TOY, seed=14)


def sample_sequence(seed=3, frames=8, cls=GestureClass.SWIPE_LEFT):
    seq = generate_sequence(cls, GenConfig(frames_per_sequence=frames, seed=seed), seed)
    return synth_gaze(seq, seed + 1)


def stream_probs(model, seq, session=None):
    session = session or StreamSession(model)
    out = []
    for frame in seq.frames:
        reply = json.loads(handle_message(session, json.dumps(frame_message(frame))))
        assert reply["type"] == "probs", reply
        out.append(reply)
    return out


class TestSessionStep:
    def test_stream_matches_batch_forward(self, model):
        seq = sample_sequence()
        batch = forward_sequence(model, seq)
        replies = stream_probs(model, seq)
        for t, (reply, out) in enumerate(zip(replies, batch)):
            npt.assert_allclose(reply["probs"], out.probs, atol=1e-12)
            assert reply["t"] == out.t_ms
            assert reply["label"] == GestureClass(out.top_class).label
            assert reply["latency_us"] >= 0

    def test_probs_sum_to_one(self, model):
        for reply in stream_probs(model, sample_sequence(9)):
            assert abs(sum(reply["probs"]) - 1.0) < 1e-9

    def test_malformed_joints_error_and_recovery(self, model):
        session = StreamSession(model)
        seq = sample_sequence()
        ok = json.loads(
            handle_message(session, json.dumps(frame_message(seq.frames[0])))
        )
        assert ok["type"] == "probs"
        bad = frame_message(seq.frames[1])
        bad["joints"] = bad["joints"][:20]  # one joint short
        err = json.loads(handle_message(session, json.dumps(bad)))
        assert err["type"] == "error"
        assert err["code"] == "bad_frame"
        ok2 = json.loads(
            handle_message(session, json.dumps(frame_message(seq.frames[1])))
        )
        assert ok2["type"] == "probs"

    def test_error_replies_leave_state_untouched(self, model):
        seq = sample_sequence(5)
        clean = stream_probs(model, seq)

        session = StreamSession(model)
        first = json.loads(handle_message(session, json.dumps(frame_message(seq.frames[0]))))
        bad = frame_message(seq.frames[1])
        bad["joints"] = [[0.0, 0.0, 0.0]] * 21  # zero-length bones
        err = json.loads(handle_message(session, json.dumps(bad)))
        assert err["type"] == "error" and err["code"] == "invalid_skeleton"
        rest = stream_probs(model, type(seq)(seq.label, seq.frames[1:], seq.provenance), session)
        npt.assert_allclose(first["probs"], clean[0]["probs"], atol=0)
        for a, b in zip(rest, clean[1:]):
            npt.assert_allclose(a["probs"], b["probs"], atol=0)

    def test_non_monotonic_timestamp_rejected(self, model):
        session = StreamSession(model)
        seq = sample_sequence()
        handle_message(session, json.dumps(frame_message(seq.frames[1])))
        stale = frame_message(seq.frames[0])
        err = json.loads(handle_message(session, json.dumps(stale)))
        assert err["type"] == "error"
        assert err["code"] == "non_monotonic_t"

    def test_reset_clears_state_and_returns_nothing(self, model):
        session = StreamSession(model)
        seq = sample_sequence()
        stream_probs(model, seq, session)
        assert session.prev is not None
        assert handle_message(session, json.dumps({"type": "reset"})) is None
        assert session.prev is None
        npt.assert_array_equal(session.state.h, 0.0)
        npt.assert_array_equal(session.state.c, 0.0)
        # timestamps restart after reset
        replay = stream_probs(model, seq, session)
        npt.assert_allclose(replay[0]["probs"], stream_probs(model, seq)[0]["probs"], atol=0)

    def test_session_isolation_under_interleaving(self, model):
        seq_a = sample_sequence(1, cls=GestureClass.FIST)
        seq_b = sample_sequence(2, cls=GestureClass.WAVE)
        alone_a = stream_probs(model, seq_a)
        alone_b = stream_probs(model, seq_b)
        sa, sb = StreamSession(model, "a"), StreamSession(model, "b")
        inter_a, inter_b = [], []
        for fa, fb in zip(seq_a.frames, seq_b.frames):
            inter_a.append(json.loads(handle_message(sa, json.dumps(frame_message(fa)))))
            inter_b.append(json.loads(handle_message(sb, json.dumps(frame_message(fb)))))
        for got, want in ((inter_a, alone_a), (inter_b, alone_b)):
            for g, w in zip(got, want):
                npt.assert_allclose(g["probs"], w["probs"], atol=0)

    def test_bad_json_and_unknown_type(self, model):
        session = StreamSession(model)
        err = json.loads(handle_message(session, "{oops"))
        assert err["code"] == "bad_message"
        err = json.loads(handle_message(session, json.dumps({"type": "nope"})))
        assert err["code"] == "bad_message"
        err = json.loads(handle_message(session, json.dumps([1, 2])))
        assert err["code"] == "bad_message"

    def test_frames_seen_and_latency_stats(self, model):
        session = StreamSession(model)
        stream_probs(model, sample_sequence(frames=6), session)
        assert session.frames_seen == 6
        summary = session.stats.summary()
        assert summary["count"] == 6
        assert summary["p50_us"] <= summary["p99_us"] <= summary["max_us"]


class TestHello:
    def test_hello_lists_classes(self, model):
        msg = hello_message(model)
        assert msg["type"] == "hello"
        assert msg["classes"] == [
            "open_palm", "fist", "pinch", "point",
            "swipe_left", "swipe_right", "wave", "thumbs_up",
        ]
        assert msg["model_version"] == 1


class TestStdioTransport:
    def test_hello_first_then_replies(self, model):
        seq = sample_sequence(frames=4)
        lines = [json.dumps(frame_message(f)) for f in seq.frames]
        lines.insert(2, json.dumps({"type": "reset"}))
        in_stream = io.StringIO("\n".join(lines) + "\n")
        out_stream = io.StringIO()
        serve_stdio(model, in_stream, out_stream)
        out_lines = out_stream.getvalue().splitlines()
        assert json.loads(out_lines[0])["type"] == "hello"
        # 4 frames produce 4 replies; the reset produces none
        assert len(out_lines) == 5
        assert all(json.loads(l)["type"] == "probs" for l in out_lines[1:])

    def test_blank_lines_ignored(self, model):
        in_stream = io.StringIO("\n\n")
        out_stream = io.StringIO()
        serve_stdio(model, in_stream, out_stream)
        assert len(out_stream.getvalue().splitlines()) == 1  # hello only


class TestWebSocketTransport:
    def test_round_trip_and_concurrent_sessions(self, model):
        import socket

        import websockets

        async def scenario():
            sock = socket.socket()
            sock.bind(("127.0.0.1", 0))
            port = sock.getsockname()[1]
            sock.close()

            task = asyncio.create_task(serve_websocket_async(model, "127.0.0.1", port))
            await asyncio.sleep(0.3)
            seq_a = sample_sequence(1, frames=5, cls=GestureClass.FIST)
            seq_b = sample_sequence(2, frames=5, cls=GestureClass.WAVE)
            try:
                async with websockets.connect(f"ws://127.0.0.1:{port}") as ca:
                    async with websockets.connect(f"ws://127.0.0.1:{port}") as cb:
                        hello_a = json.loads(await ca.recv())
                        hello_b = json.loads(await cb.recv())
                        assert hello_a["type"] == "hello"
                        assert hello_b["classes"][1] == "fist"
                        got_a, got_b = [], []
                        for fa, fb in zip(seq_a.frames, seq_b.frames):
                            await ca.send(json.dumps(frame_message(fa)))
                            await cb.send(json.dumps(frame_message(fb)))
                            got_a.append(json.loads(await ca.recv()))
                            got_b.append(json.loads(await cb.recv()))
            finally:
                task.cancel()
                try:
                    await task
                except asyncio.CancelledError:
                    pass
            alone_a = stream_probs(model, seq_a)
            alone_b = stream_probs(model, seq_b)
            for got, want in ((got_a, alone_a), (got_b, alone_b)):
                for g, w in zip(got, want):
                    npt.assert_allclose(g["probs"], w["probs"], atol=0)

        asyncio.run(scenario())


class TestBench:
    def test_report_and_determinism(self, model, tmp_path):
        from gesturekit.dataset import save_dataset

        data = [sample_sequence(s, frames=6, cls=GestureClass(s % 8)) for s in range(6)]
        path = tmp_path / "bench.jsonl"
        save_dataset(data, path)
        model_path = tmp_path / "model.gkw"
        save_weights(model, model_path)
        report = bench(model_path, path, reps=2)
        assert report["sequences"] == 6
        assert report["frames_per_rep"] == 36
        assert report["reps"] == 2
        assert report["count"] == 72
        assert report["p50_us"] <= report["p99_us"] <= report["max_us"]
        assert report["labels_identical_across_reps"]
        assert len(report["final_labels"]) == 6
        assert report["frames_per_second"] > 0

    def test_latencies_returned_on_request(self, model):
        data = [sample_sequence(1, frames=4)]
        report, latencies = bench(model, data, reps=1, return_latencies=True)
        assert len(latencies) == 4
        assert report["count"] == 4

    def test_reps_validation(self, model):
        with pytest.raises(ValueError):
            bench(model, [sample_sequence(1)], reps=0)


class TestLatencyStats:
    def test_percentiles_ordered(self):
        stats = LatencyStats()
        for v in (5, 1, 9, 3, 7, 100):
            stats.record(v)
        assert stats.percentile(50) <= stats.percentile(99) <= 100
        summary = stats.summary()
        assert summary["max_us"] == 100.0
        assert summary["count"] == 6

    def test_empty(self):
        summary = LatencyStats().summary()
        assert summary == {"count": 0, "p50_us": 0.0, "p99_us": 0.0, "max_us": 0.0}


class TestParseAddr:
    def test_valid(self):
        assert parse_addr("0.0.0.0:9001") == ("0.0.0.0", 9001)
        assert parse_addr(":9001") == ("127.0.0.1", 9001)

    def test_invalid(self):
        for bad in ("nope", "host:", "host:port"):
            with pytest.raises(ValueError):
                parse_addr(bad)
