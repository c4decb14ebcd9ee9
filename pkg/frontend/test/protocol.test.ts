import { describe, expect, it } from "vitest";

import {
  decodeMessage,
  encodeMessage,
  sampleMessage,
  switchMessage,
} from "../src/protocol.js";

describe("wire protocol", () => {
  it("round-trips a sample message", () => {
    const msg = sampleMessage("abc", 12.5, 100.25, 200.75);
    const again = decodeMessage(encodeMessage(msg));
    expect(again).toEqual(msg);
    expect(again.payload.source).toBe("pointer_proxy");
  });

  it("round-trips a switch message", () => {
    const msg = switchMessage("abc", 99, "mechanical_left");
    expect(decodeMessage(encodeMessage(msg))).toEqual(msg);
  });

  it("rejects non-JSON", () => {
    expect(() => decodeMessage("{nope")).toThrow(/not JSON/);
  });

  it("rejects messages without required fields", () => {
    expect(() => decodeMessage(JSON.stringify({ kind: "sample" }))).toThrow(
      /session_id/,
    );
    expect(() =>
      decodeMessage(JSON.stringify({ kind: "x", session_id: "s" })),
    ).toThrow(/t_ms/);
  });

  it("defaults a missing payload to an empty object", () => {
    const msg = decodeMessage(
      JSON.stringify({ kind: "error", session_id: "s", t_ms: 1 }),
    );
    expect(msg.payload).toEqual({});
  });
});
