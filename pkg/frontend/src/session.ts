/**
 * Live session state: a pure reducer over server messages.
 *
 * Every displayed number originates in a server message; this module never
 * classifies anything itself. Probabilities are stored exactly as received,
 * and the label history appends only when the server's label changes.
 */

import type { ServerMsg } from "./protocol.js";

export type ConnectionStatus = "disconnected" | "connecting" | "connected";

export interface SessionView {
  status: ConnectionStatus;
  classes: string[];
  modelVersion: number | null;
  probs: number[] | null;
  latencyUs: number | null;
  currentLabel: string | null;
  labelHistory: string[];
  lastError: string | null;
}

export function initialView(): SessionView {
  return {
    status: "disconnected",
    classes: [],
    modelVersion: null,
    probs: null,
    latencyUs: null,
    currentLabel: null,
    labelHistory: [],
    lastError: null,
  };
}

export function withStatus(view: SessionView, status: ConnectionStatus): SessionView {
  return { ...view, status };
}

export function applyServerMessage(view: SessionView, msg: ServerMsg): SessionView {
  switch (msg.type) {
    case "hello":
      return {
        ...view,
        status: "connected",
        classes: [...msg.classes],
        modelVersion: msg.model_version,
      };
    case "probs": {
      const changed = msg.label !== view.currentLabel;
      return {
        ...view,
        probs: msg.probs,
        latencyUs: msg.latency_us,
        currentLabel: msg.label,
        labelHistory: changed ? [...view.labelHistory, msg.label] : view.labelHistory,
      };
    }
    case "error":
      // display stays on the last good reply; only the error line updates
      return { ...view, lastError: `${msg.code}: ${msg.detail}` };
  }
}

/** Labels in the order a client shows them: one entry per probs reply. */
export function labelsFromMessages(messages: ServerMsg[]): string[] {
  const out: string[] = [];
  let view = initialView();
  for (const msg of messages) {
    view = applyServerMessage(view, msg);
    if (msg.type === "probs") {
      out.push(view.currentLabel as string);
    }
  }
  return out;
}
