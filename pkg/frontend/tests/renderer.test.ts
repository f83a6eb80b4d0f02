import { describe, expect, it } from "vitest";

import { gazeWeights, restPose } from "../src/kinematics.js";
import {
  FINGER_BONE_COLOR,
  JOINT_COLOR,
  PALM_BONE_COLOR,
  project,
  skeletonDrawList,
  unproject,
  type Projection,
} from "../src/renderer.js";

const PROJ: Projection = { scale: 90, cx: 320, cy: 400 };

describe("rest pose rendering contract", () => {
  const list = skeletonDrawList(restPose(), null, PROJ);

  it("draws 21 red joint markers", () => {
    const joints = list.circles.filter((c) => c.kind === "joint");
    expect(joints).toHaveLength(21);
    expect(joints.every((c) => c.color === JOINT_COLOR)).toBe(true);
    expect(JOINT_COLOR).toBe("#e03131");
  });

  it("draws 5 blue palm bones", () => {
    const palm = list.segments.filter((s) => s.kind === "palm_bone");
    expect(palm).toHaveLength(5);
    expect(palm.every((s) => s.color === PALM_BONE_COLOR)).toBe(true);
    expect(PALM_BONE_COLOR).toBe("#1c7ed6");
  });

  it("draws 15 green finger bones", () => {
    const finger = list.segments.filter((s) => s.kind === "finger_bone");
    expect(finger).toHaveLength(15);
    expect(finger.every((s) => s.color === FINGER_BONE_COLOR)).toBe(true);
    expect(FINGER_BONE_COLOR).toBe("#2f9e44");
  });

  it("has no halos without attention weights", () => {
    expect(list.circles.filter((c) => c.kind === "halo")).toHaveLength(0);
  });

  it("matches the documented draw-list snapshot shape", () => {
    const summary = {
      segments: {
        palm: list.segments.filter((s) => s.kind === "palm_bone").length,
        finger: list.segments.filter((s) => s.kind === "finger_bone").length,
      },
      circles: {
        joint: list.circles.filter((c) => c.kind === "joint").length,
        halo: list.circles.filter((c) => c.kind === "halo").length,
      },
      colors: {
        joint: JOINT_COLOR,
        palm: PALM_BONE_COLOR,
        finger: FINGER_BONE_COLOR,
      },
    };
    expect(summary).toEqual({
      segments: { palm: 5, finger: 15 },
      circles: { joint: 21, halo: 0 },
      colors: { joint: "#e03131", palm: "#1c7ed6", finger: "#2f9e44" },
    });
  });
});

describe("attention halos", () => {
  it("renders equal halos for uniform attention", () => {
    const weights = new Array(21).fill(1 / 21);
    const list = skeletonDrawList(restPose(), weights, PROJ);
    const halos = list.circles.filter((c) => c.kind === "halo");
    expect(halos).toHaveLength(21);
    const radii = new Set(halos.map((c) => c.r));
    expect(radii.size).toBe(1);
  });

  it("puts the visibly largest halo on the most attended joint", () => {
    const joints = restPose();
    const tip = joints[8]; // INDEX_TIP
    const weights = gazeWeights(joints, [tip[0], tip[1]], 0.2);
    const list = skeletonDrawList(joints, weights, PROJ);
    const halos = list.circles.filter((c) => c.kind === "halo");
    const biggest = halos.reduce((a, b) => (b.r > a.r ? b : a));
    expect(biggest.joint).toBe(8);
    const others = halos.filter((c) => c.joint !== 8).map((c) => c.r);
    expect(biggest.r).toBeGreaterThan(Math.max(...others) * 1.5);
  });

  it("keeps halo radii monotone in the weights", () => {
    const joints = restPose();
    const weights = gazeWeights(joints, [0.3, 1.1], 0.4);
    const halos = skeletonDrawList(joints, weights, PROJ).circles.filter(
      (c) => c.kind === "halo",
    );
    for (let a = 0; a < halos.length; a++) {
      for (let b = 0; b < halos.length; b++) {
        if (weights[halos[a].joint] > weights[halos[b].joint]) {
          expect(halos[a].r).toBeGreaterThanOrEqual(halos[b].r);
        }
      }
    }
  });
});

describe("projection", () => {
  it("unproject inverts project", () => {
    for (const p of [[0.3, -1.2], [-2, 0.5], [0, 0]] as [number, number][]) {
      const screen = project(p, PROJ);
      const back = unproject(screen.x, screen.y, PROJ);
      expect(back[0]).toBeCloseTo(p[0], 12);
      expect(back[1]).toBeCloseTo(p[1], 12);
    }
  });

  it("maps scene +y to screen up", () => {
    const low = project([0, 0], PROJ);
    const high = project([0, 1], PROJ);
    expect(high.y).toBeLessThan(low.y);
  });

  it("rejects malformed skeletons", () => {
    expect(() => skeletonDrawList(restPose().slice(0, 20), null, PROJ)).toThrow(
      /21 joints/,
    );
  });
});
