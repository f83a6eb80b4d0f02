/**
 * Puppet state -> outgoing frame messages.
 *
 * The FrameSource owns the timestamp discipline: timestamps step by the
 * emission interval and strictly increase within a connection epoch; a reset
 * starts the next epoch at t=0.
 */

import { poseFromCurls, type Curls } from "./kinematics.js";
import type { FrameMsg } from "./protocol.js";

export interface PuppetState {
  curls: Curls;
  offset: { x: number; y: number };
  preset: string; // a class name or "free"
  jog: number; // playback position in [0, 1] when replaying a loaded sequence
}

export function initialPuppet(): PuppetState {
  return { curls: [0, 0, 0, 0, 0], offset: { x: 0, y: 0 }, preset: "free", jog: 0 };
}

const clamp01 = (v: number) => (v < 0 ? 0 : v > 1 ? 1 : v);

/** Sliders and jog live in [0, 1]; anything outside is pinned. */
export function clampPuppet(state: PuppetState): PuppetState {
  return {
    ...state,
    curls: state.curls.map(clamp01) as Curls,
    jog: clamp01(state.jog),
  };
}

export function puppetJoints(state: PuppetState) {
  const s = clampPuppet(state);
  return poseFromCurls(s.curls, [s.offset.x, s.offset.y]);
}

export const DEFAULT_FRAME_INTERVAL_MS = 1000 / 30; // 30 Hz emission cadence

export class FrameSource {
  private count = 0;
  private lastT = -1;

  constructor(readonly intervalMs: number = DEFAULT_FRAME_INTERVAL_MS) {}

  /** Begin a new epoch (after sending a reset). */
  reset(): void {
    this.count = 0;
    this.lastT = -1;
  }

  nextTimestamp(): number {
    let t = Math.round(this.count * this.intervalMs);
    this.count += 1;
    if (t <= this.lastT) {
      t = this.lastT + 1; // strict monotonicity even under rounding collisions
    }
    this.lastT = t;
    return t;
  }

  buildFrame(state: PuppetState, gaze: [number, number] | null): FrameMsg {
    return {
      type: "frame",
      t: this.nextTimestamp(),
      joints: puppetJoints(state).map((p) => [p[0], p[1], p[2]]),
      gaze,
    };
  }
}
