/** Wire messages shared with the streaming service (JSON text frames). */

export interface FrameMsg {
  type: "frame";
  t: number;
  joints: number[][];
  gaze: [number, number] | null;
}

export interface ResetMsg {
  type: "reset";
}

export interface HelloMsg {
  type: "hello";
  classes: string[];
  model_version: number;
}

export interface ProbsMsg {
  type: "probs";
  t: number;
  probs: number[];
  label: string;
  latency_us: number;
}

export interface ErrorMsg {
  type: "error";
  code: string;
  detail: string;
}

export type ServerMsg = HelloMsg | ProbsMsg | ErrorMsg;
export type ClientMsg = FrameMsg | ResetMsg;

export function encodeClientMessage(msg: ClientMsg): string {
  return JSON.stringify(msg);
}

/** Returns null for anything that is not a well-formed server message. */
export function parseServerMessage(text: string): ServerMsg | null {
  let data: unknown;
  try {
    data = JSON.parse(text);
  } catch {
    return null;
  }
  if (typeof data !== "object" || data === null) return null;
  const msg = data as Record<string, unknown>;
  switch (msg.type) {
    case "hello":
      if (Array.isArray(msg.classes) && typeof msg.model_version === "number") {
        return msg as unknown as HelloMsg;
      }
      return null;
    case "probs":
      if (
        typeof msg.t === "number" &&
        Array.isArray(msg.probs) &&
        (msg.probs as unknown[]).every((p) => typeof p === "number") &&
        typeof msg.label === "string" &&
        typeof msg.latency_us === "number"
      ) {
        return msg as unknown as ProbsMsg;
      }
      return null;
    case "error":
      if (typeof msg.code === "string") {
        return { type: "error", code: msg.code, detail: String(msg.detail ?? "") };
      }
      return null;
    default:
      return null;
  }
}
