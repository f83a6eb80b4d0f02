/**
 * The hand model the backend's generator uses, ported table for table:
 * fingers fan out from the wrist in the x-y plane and curl toward -z.
 * Puppet sliders drive the same per-finger curl parameter the preset
 * gestures are built from, so the console produces frames the recognizer
 * was trained on.
 */

export const JOINT_COUNT = 21;

export const JOINT_NAMES = [
  "WRIST",
  "THUMB_CMC", "THUMB_MCP", "THUMB_IP", "THUMB_TIP",
  "INDEX_MCP", "INDEX_PIP", "INDEX_DIP", "INDEX_TIP",
  "MIDDLE_MCP", "MIDDLE_PIP", "MIDDLE_DIP", "MIDDLE_TIP",
  "RING_MCP", "RING_PIP", "RING_DIP", "RING_TIP",
  "PINKY_MCP", "PINKY_PIP", "PINKY_DIP", "PINKY_TIP",
] as const;

export interface Bone {
  parent: number;
  child: number;
  palmBone: boolean;
}

function buildBones(): Bone[] {
  const bases = [1, 5, 9, 13, 17];
  const palm = bases.map((c) => ({ parent: 0, child: c, palmBone: true }));
  const finger: Bone[] = [];
  for (const base of bases) {
    for (let i = 0; i < 3; i++) {
      finger.push({ parent: base + i, child: base + i + 1, palmBone: false });
    }
  }
  finger.sort((a, b) => a.child - b.child);
  return [...palm, ...finger];
}

/** The 20 bones: palm bones first, then ascending child index. */
export const BONES: readonly Bone[] = buildBones();

const PALM_LENGTHS = [0.5, 0.95, 1.0, 0.95, 0.85];
const ABDUCTION_DEG = [-45.0, -12.0, 0.0, 12.0, 26.0];
const THUMB_PHALANGES = [0.45, 0.35, 0.3];
const FINGER_TEMPLATE = [0.45, 0.28, 0.22];
const CURL_BEND = [1.6, 1.8, 1.3];

export type Vec3 = [number, number, number];
export type Joints = Vec3[]; // 21 entries

export type Curls = [number, number, number, number, number];

export const CLASS_NAMES = [
  "open_palm", "fist", "pinch", "point",
  "swipe_left", "swipe_right", "wave", "thumbs_up",
] as const;

/** Per-finger curl targets of the preset gestures (thumb..pinky). */
export const CLASS_CURLS: Record<string, Curls> = {
  open_palm: [0, 0, 0, 0, 0],
  fist: [1, 1, 1, 1, 1],
  pinch: [0.55, 0.6, 0.15, 0.15, 0.15],
  point: [1, 0, 1, 1, 1],
  thumbs_up: [0, 1, 1, 1, 1],
  // trajectory classes hold the neutral half-open pose
  swipe_left: [0.4, 0.4, 0.4, 0.4, 0.4],
  swipe_right: [0.4, 0.4, 0.4, 0.4, 0.4],
  wave: [0.4, 0.4, 0.4, 0.4, 0.4],
};

function fingerDirection(finger: number): Vec3 {
  const theta = (ABDUCTION_DEG[finger] * Math.PI) / 180.0;
  return [Math.sin(theta), Math.cos(theta), 0.0];
}

function phalanxLengths(finger: number): number[] {
  if (finger === 0) return THUMB_PHALANGES;
  return FINGER_TEMPLATE.map((t) => t * PALM_LENGTHS[finger]);
}

/**
 * Hand pose for five per-finger curls in [0, 1]; curl 0 is a straight
 * finger along its ray, curl 1 bends the three joints by the full bend
 * angles toward -z. Optionally translated by a drag offset in the x-y plane.
 */
export function poseFromCurls(curls: Curls, offset: [number, number] = [0, 0]): Joints {
  const joints: Joints = Array.from({ length: JOINT_COUNT }, () => [0, 0, 0] as Vec3);
  for (let f = 0; f < 5; f++) {
    const d = fingerDirection(f);
    const base = 1 + 4 * f;
    joints[base] = [PALM_LENGTHS[f] * d[0], PALM_LENGTHS[f] * d[1], 0.0];
    let phi = 0.0;
    let pos = joints[base];
    const lengths = phalanxLengths(f);
    for (let j = 0; j < 3; j++) {
      phi += curls[f] * CURL_BEND[j];
      const seg: Vec3 = [
        Math.cos(phi) * d[0],
        Math.cos(phi) * d[1],
        -Math.sin(phi),
      ];
      pos = [
        pos[0] + lengths[j] * seg[0],
        pos[1] + lengths[j] * seg[1],
        pos[2] + lengths[j] * seg[2],
      ];
      joints[base + 1 + j] = pos;
    }
  }
  if (offset[0] !== 0 || offset[1] !== 0) {
    for (const p of joints) {
      p[0] += offset[0];
      p[1] += offset[1];
    }
  }
  return joints;
}

export function restPose(): Joints {
  return poseFromCurls([0, 0, 0, 0, 0]);
}

/**
 * Gaze attention weights over joints, the same softmax the recognizer uses:
 * exp(-d^2 / 2 sigma^2) over gaze-to-joint x-y distances, normalized.
 * Display only; classification stays on the server.
 */
export function gazeWeights(
  joints: Joints,
  gaze: [number, number],
  sigma = 0.5,
): number[] {
  const scores = joints.map((p) => {
    const dx = p[0] - gaze[0];
    const dy = p[1] - gaze[1];
    return -(dx * dx + dy * dy) / (2 * sigma * sigma);
  });
  const m = Math.max(...scores);
  const exps = scores.map((s) => Math.exp(s - m));
  const total = exps.reduce((a, b) => a + b, 0);
  return exps.map((e) => e / total);
}
