import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";
import { describe, expect, it } from "vitest";

import { encodeClientMessage, type FrameMsg } from "../src/protocol.js";
import {
  parseTranscript,
  probsLabels,
  ReplayDriver,
  transcriptFrames,
  transcriptReplies,
} from "../src/replay.js";
import { labelsFromMessages } from "../src/session.js";

const FIXTURES = join(dirname(fileURLToPath(import.meta.url)), "fixtures");
const transcriptText = readFileSync(join(FIXTURES, "golden_session.jsonl"), "utf-8");
const stdioLabels: string[] = JSON.parse(
  readFileSync(join(FIXTURES, "golden_labels.json"), "utf-8"),
);

describe("golden-session parity", () => {
  const entries = parseTranscript(transcriptText);

  it("reads the recorded wire transcript", () => {
    expect(entries[0]).toMatchObject({ dir: "out", msg: { type: "hello" } });
    expect(transcriptFrames(entries)).toHaveLength(24);
  });

  it("yields the stdio client's label sequence, identically", () => {
    // replay the recorded server messages through the console's own decoder
    // and reducer; the label sequence must match the headless client's
    const uiLabels = labelsFromMessages(transcriptReplies(entries));
    expect(uiLabels).toEqual(stdioLabels);
    expect(JSON.stringify(uiLabels)).toBe(JSON.stringify(stdioLabels));
  });

  it("agrees with the raw transcript labels", () => {
    expect(probsLabels(transcriptReplies(entries))).toEqual(stdioLabels);
  });

  it("replays recorded frames byte-for-byte", () => {
    const frames = transcriptFrames(entries);
    const driver = new ReplayDriver(frames, 30);
    const emitted: FrameMsg[] = [];
    let now = 0;
    while (!driver.done) {
      emitted.push(...driver.tick(now));
      now += 16;
    }
    expect(emitted).toHaveLength(frames.length);
    for (let i = 0; i < frames.length; i++) {
      expect(emitted[i]).toBe(frames[i]); // same object: pass-through
      expect(encodeClientMessage(emitted[i])).toBe(encodeClientMessage(frames[i]));
    }
  });
});

describe("30 Hz emission over a 60 s replay", () => {
  it("sustains the cadence with strictly increasing timestamps", () => {
    const frames: FrameMsg[] = Array.from({ length: 1800 }, (_, i) => ({
      type: "frame",
      t: Math.round((i * 1000) / 30),
      joints: [[0, 0, 0]],
      gaze: null,
    }));
    const driver = new ReplayDriver(frames, 30);
    const perSecond = new Array(60).fill(0);
    const emitted: FrameMsg[] = [];
    // simulate one minute of 60 fps animation ticks on a virtual clock
    for (let now = 0; now < 60_000; now += 1000 / 60) {
      for (const frame of driver.tick(now)) {
        perSecond[Math.floor(now / 1000)] += 1;
        emitted.push(frame);
      }
    }
    expect(emitted.length).toBe(1800); // 30 Hz for 60 s
    for (const count of perSecond) {
      expect(count).toBeGreaterThanOrEqual(29);
      expect(count).toBeLessThanOrEqual(31);
    }
    for (let i = 1; i < emitted.length; i++) {
      expect(emitted[i].t).toBeGreaterThan(emitted[i - 1].t);
    }
  });

  it("seek repositions the stream", () => {
    const frames: FrameMsg[] = Array.from({ length: 100 }, (_, i) => ({
      type: "frame",
      t: i * 33,
      joints: [[0, 0, 0]],
      gaze: null,
    }));
    const driver = new ReplayDriver(frames, 30);
    driver.seek(0.5, 0);
    const batch = driver.tick(0);
    expect(batch[0].t).toBe(50 * 33);
    expect(driver.position).toBeGreaterThan(0.5);
  });
});
