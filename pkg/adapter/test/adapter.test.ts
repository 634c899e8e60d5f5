import * as fs from "node:fs";
import * as os from "node:os";
import * as path from "node:path";

import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { detectStream, writeDetectionsJsonl } from "../src/adapter.js";
import { ModelLoadFailure, UnreadableInput } from "../src/errors.js";
import { frameSchema } from "../src/types.js";
import { writeClip } from "./fixtures.js";

let clipDir: string;
let tmpRoot: string;

beforeAll(() => {
  tmpRoot = fs.mkdtempSync(path.join(os.tmpdir(), "lofi-adapter-test-"));
  clipDir = path.join(tmpRoot, "clip");
  writeClip(clipDir, 10, 4); // frame 4 has no person
});

afterAll(() => {
  fs.rmSync(tmpRoot, { recursive: true, force: true });
});

describe("detectStream on a 10-frame clip", () => {
  const config = { input: "", model: "blob", confFloor: 0.25, fps: 26 };

  it("emits one schema-valid line per frame", () => {
    const frames = detectStream({ ...config, input: clipDir });
    expect(frames).toHaveLength(10);
    for (const frame of frames) {
      expect(() => frameSchema.parse(JSON.parse(JSON.stringify(frame)))).not.toThrow();
    }
  });

  it("synthesizes strictly increasing timestamps at the override rate", () => {
    const frames = detectStream({ ...config, input: clipDir });
    for (let i = 0; i < frames.length; i++) {
      expect(frames[i].ts).toBeCloseTo(i / 26, 12);
      if (i > 0) expect(frames[i].ts).toBeGreaterThan(frames[i - 1].ts);
    }
  });

  it("passes the person smoke test on a majority of frames", () => {
    const frames = detectStream({ ...config, input: clipDir });
    const withPerson = frames.filter((f) =>
      f.detections.some((d) => d.label === "person" && d.conf >= 0.25),
    );
    expect(withPerson.length).toBeGreaterThanOrEqual(6);
  });

  it("emits an empty detections array for the empty frame", () => {
    const frames = detectStream({ ...config, input: clipDir });
    expect(frames[4].detections).toHaveLength(0);
    expect(frames[4].ts).toBeCloseTo(4 / 26, 12);
  });

  it("applies the confidence floor", () => {
    const all = detectStream({ ...config, input: clipDir, confFloor: 0 });
    const none = detectStream({ ...config, input: clipDir, confFloor: 1.0 + 0 });
    expect(all.some((f) => f.detections.length > 0)).toBe(true);
    // solid rectangles have conf 1.0, so a floor of exactly 1 keeps them
    expect(none.filter((f) => f.detections.length > 0).length).toBeGreaterThanOrEqual(6);
  });

  it("writes JSON Lines output", () => {
    const out = path.join(tmpRoot, "out.jsonl");
    writeDetectionsJsonl(out, detectStream({ ...config, input: clipDir }));
    const lines = fs.readFileSync(out, "utf8").trim().split("\n");
    expect(lines).toHaveLength(10);
    for (const line of lines) {
      expect(() => frameSchema.parse(JSON.parse(line))).not.toThrow();
    }
  });

  it("rejects unknown models", () => {
    expect(() => detectStream({ ...config, input: clipDir, model: "yolo11" })).toThrow(
      ModelLoadFailure,
    );
  });

  it("rejects missing inputs", () => {
    expect(() => detectStream({ ...config, input: path.join(tmpRoot, "nope") })).toThrow(
      UnreadableInput,
    );
  });

  it("rejects a directory without frames", () => {
    const empty = path.join(tmpRoot, "empty");
    fs.mkdirSync(empty, { recursive: true });
    expect(() => detectStream({ ...config, input: empty })).toThrow(UnreadableInput);
  });

  it("rejects bad parameter ranges", () => {
    expect(() => detectStream({ ...config, input: clipDir, confFloor: 1.5 })).toThrow(
      UnreadableInput,
    );
    expect(() => detectStream({ ...config, input: clipDir, fps: 0 })).toThrow(UnreadableInput);
  });
});
