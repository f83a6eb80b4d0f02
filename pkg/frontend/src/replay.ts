/**
 * Golden-session transcripts and replay.
 *
 * A transcript is JSON Lines of {"dir":"in"|"out","msg":...} entries exactly
 * as they crossed the wire. Replay is pass-through: recorded frames go out
 * byte-for-byte (content untouched), paced at the emission cadence by an
 * injected clock so tests can drive a 60-second replay instantly.
 */

import type { ClientMsg, FrameMsg, ProbsMsg, ServerMsg } from "./protocol.js";
import { parseServerMessage } from "./protocol.js";

export interface TranscriptEntry {
  dir: "in" | "out";
  msg: ClientMsg | ServerMsg;
}

export function parseTranscript(text: string): TranscriptEntry[] {
  const out: TranscriptEntry[] = [];
  for (const line of text.split("\n")) {
    const trimmed = line.trim();
    if (!trimmed) continue;
    const entry = JSON.parse(trimmed) as TranscriptEntry;
    if (entry.dir !== "in" && entry.dir !== "out") {
      throw new Error(`bad transcript direction: ${JSON.stringify(entry.dir)}`);
    }
    out.push(entry);
  }
  return out;
}

export function transcriptFrames(entries: TranscriptEntry[]): FrameMsg[] {
  return entries
    .filter((e) => e.dir === "in" && (e.msg as ClientMsg).type === "frame")
    .map((e) => e.msg as FrameMsg);
}

export function transcriptReplies(entries: TranscriptEntry[]): ServerMsg[] {
  // re-parse through the client path so replay exercises the same decoder
  return entries
    .filter((e) => e.dir === "out")
    .map((e) => parseServerMessage(JSON.stringify(e.msg)))
    .filter((m): m is ServerMsg => m !== null);
}

export function probsLabels(messages: ServerMsg[]): string[] {
  return messages.filter((m): m is ProbsMsg => m.type === "probs").map((m) => m.label);
}

/**
 * Paces a frame list at a fixed cadence against a caller-supplied clock.
 * `tick(nowMs)` returns every frame whose slot has come due since the last
 * call; frame contents are the recorded objects, untouched.
 */
export class ReplayDriver {
  private emitted = 0;
  private startMs: number | null = null;

  constructor(
    readonly frames: FrameMsg[],
    readonly hz: number = 30,
  ) {
    if (hz <= 0) throw new Error("replay rate must be positive");
  }

  get done(): boolean {
    return this.emitted >= this.frames.length;
  }

  /** Fraction of the sequence already emitted, for the jog readout. */
  get position(): number {
    return this.frames.length ? this.emitted / this.frames.length : 1;
  }

  tick(nowMs: number): FrameMsg[] {
    if (this.startMs === null) this.startMs = nowMs;
    const interval = 1000 / this.hz;
    const due = Math.min(
      this.frames.length,
      Math.floor((nowMs - this.startMs) / interval) + 1,
    );
    const batch = this.frames.slice(this.emitted, due);
    this.emitted = due > this.emitted ? due : this.emitted;
    return batch;
  }

  /** Jump to a jog position in [0, 1]; earlier frames count as emitted. */
  seek(position: number, nowMs: number): void {
    const clamped = Math.max(0, Math.min(1, position));
    this.emitted = Math.round(clamped * this.frames.length);
    const interval = 1000 / this.hz;
    this.startMs = nowMs - this.emitted * interval;
  }
}
