import { describe, expect, it } from "vitest";

import { encodeClientMessage, parseServerMessage } from "../src/protocol.js";

describe("parseServerMessage", () => {
  it("parses the three server message types", () => {
    expect(
      parseServerMessage('{"type":"hello","classes":["fist"],"model_version":1}'),
    ).toEqual({ type: "hello", classes: ["fist"], model_version: 1 });
    expect(
      parseServerMessage(
        '{"type":"probs","t":33,"probs":[0.5,0.5],"label":"fist","latency_us":7}',
      ),
    ).toMatchObject({ type: "probs", label: "fist" });
    expect(
      parseServerMessage('{"type":"error","code":"bad_frame","detail":"x"}'),
    ).toEqual({ type: "error", code: "bad_frame", detail: "x" });
  });

  it("returns null for malformed input", () => {
    expect(parseServerMessage("{oops")).toBeNull();
    expect(parseServerMessage("42")).toBeNull();
    expect(parseServerMessage('{"type":"mystery"}')).toBeNull();
    expect(parseServerMessage('{"type":"probs","t":1}')).toBeNull();
    expect(parseServerMessage('{"type":"probs","t":1,"probs":["a"],"label":"x","latency_us":1}')).toBeNull();
    expect(parseServerMessage('{"type":"hello","classes":"nope","model_version":1}')).toBeNull();
  });
});

describe("encodeClientMessage", () => {
  it("round-trips frame messages", () => {
    const frame = {
      type: "frame" as const,
      t: 33,
      joints: [[0.1, 0.2, 0.3]],
      gaze: [0.5, -0.25] as [number, number],
    };
    expect(JSON.parse(encodeClientMessage(frame))).toEqual(frame);
  });

  it("encodes reset", () => {
    expect(encodeClientMessage({ type: "reset" })).toBe('{"type":"reset"}');
  });
});
