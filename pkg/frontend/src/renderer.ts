/**
 * Skeleton rendering as data: the scene compiles to a draw list (segments
 * then circles) that the canvas adapter executes verbatim. Keeping the
 * geometry pure makes the joint/bone/color contract snapshot-testable
 * without a browser.
 *
 * Color scheme: red joints, blue wrist-to-finger-base bones, green
 * intra-finger bones; an optional amber halo per joint scales with its
 * attention weight.
 */

import { BONES, JOINT_COUNT, type Joints } from "./kinematics.js";

export const JOINT_COLOR = "#e03131"; // red
export const PALM_BONE_COLOR = "#1c7ed6"; // blue
export const FINGER_BONE_COLOR = "#2f9e44"; // green
export const HALO_COLOR = "rgba(250, 176, 5, 0.45)"; // amber, translucent

export const JOINT_RADIUS = 4;
export const HALO_MAX_RADIUS = 26;

export interface Circle {
  kind: "joint" | "halo";
  x: number;
  y: number;
  r: number;
  color: string;
  joint: number;
}

export interface Segment {
  kind: "palm_bone" | "finger_bone";
  x1: number;
  y1: number;
  x2: number;
  y2: number;
  color: string;
  width: number;
}

export interface DrawList {
  segments: Segment[];
  circles: Circle[];
}

/** Orthographic projection: scene x-y plane onto the canvas, y up. */
export interface Projection {
  scale: number;
  cx: number;
  cy: number;
}

export function project(p: [number, number] | Joints[number], proj: Projection) {
  return { x: proj.cx + proj.scale * p[0], y: proj.cy - proj.scale * p[1] };
}

/** Inverse of `project`, for mapping the mouse back into scene coordinates. */
export function unproject(x: number, y: number, proj: Projection): [number, number] {
  return [(x - proj.cx) / proj.scale, (proj.cy - y) / proj.scale];
}

export function skeletonDrawList(
  joints: Joints,
  weights: number[] | null,
  proj: Projection,
): DrawList {
  if (joints.length !== JOINT_COUNT) {
    throw new Error(`expected ${JOINT_COUNT} joints, got ${joints.length}`);
  }
  const segments: Segment[] = BONES.map((bone) => {
    const a = project(joints[bone.parent], proj);
    const b = project(joints[bone.child], proj);
    return {
      kind: bone.palmBone ? "palm_bone" : "finger_bone",
      x1: a.x,
      y1: a.y,
      x2: b.x,
      y2: b.y,
      color: bone.palmBone ? PALM_BONE_COLOR : FINGER_BONE_COLOR,
      width: bone.palmBone ? 3 : 2,
    };
  });
  const circles: Circle[] = [];
  if (weights) {
    if (weights.length !== JOINT_COUNT) {
      throw new Error(`expected ${JOINT_COUNT} weights, got ${weights.length}`);
    }
    const top = Math.max(...weights);
    for (let j = 0; j < JOINT_COUNT; j++) {
      const { x, y } = project(joints[j], proj);
      circles.push({
        kind: "halo",
        x,
        y,
        r: JOINT_RADIUS + (HALO_MAX_RADIUS - JOINT_RADIUS) * (top > 0 ? weights[j] / top : 0),
        color: HALO_COLOR,
        joint: j,
      });
    }
  }
  for (let j = 0; j < JOINT_COUNT; j++) {
    const { x, y } = project(joints[j], proj);
    circles.push({ kind: "joint", x, y, r: JOINT_RADIUS, color: JOINT_COLOR, joint: j });
  }
  return { segments, circles };
}

/** Executes a draw list on a 2D canvas context. */
export function paint(ctx: CanvasRenderingContext2D, list: DrawList): void {
  for (const seg of list.segments) {
    ctx.strokeStyle = seg.color;
    ctx.lineWidth = seg.width;
    ctx.beginPath();
    ctx.moveTo(seg.x1, seg.y1);
    ctx.lineTo(seg.x2, seg.y2);
    ctx.stroke();
  }
  for (const circle of list.circles) {
    ctx.fillStyle = circle.color;
    ctx.beginPath();
    ctx.arc(circle.x, circle.y, circle.r, 0, 2 * Math.PI);
    ctx.fill();
  }
}
