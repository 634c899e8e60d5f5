import * as fs from "node:fs";
import * as path from "node:path";

import { loadModel } from "./detectors/index.js";
import { UnreadableInput } from "./errors.js";
import { decodeImage, listFrameFiles } from "./image.js";
import { frameToLine, type AdapterConfig, type FrameDetections } from "./types.js";
import { extractVideoFrames, VIDEO_EXTENSIONS } from "./video.js";

export const DEFAULT_CONFIG: Pick<AdapterConfig, "model" | "confFloor" | "fps"> = {
  model: "blob",
  confFloor: 0.25,
  fps: 26,
};

/**
 * Run the configured detector over an image directory or video and return
 * one entry per frame, timestamps strictly increasing.
 *
 * All detected classes are emitted (label filtering is the pipeline's job);
 * only the confidence floor applies here.
 */
export function detectStream(config: AdapterConfig): FrameDetections[] {
  if (config.confFloor < 0 || config.confFloor > 1) {
    throw new UnreadableInput(`confidence floor must be in [0, 1], got ${config.confFloor}`);
  }
  if (!(config.fps > 0)) {
    throw new UnreadableInput(`fps must be positive, got ${config.fps}`);
  }
  const detector = loadModel(config.model);

  let sources: Array<{ file: string; ts: number }>;
  const stat = fs.existsSync(config.input) ? fs.statSync(config.input) : null;
  if (stat?.isDirectory()) {
    sources = listFrameFiles(config.input).map((file, i) => ({ file, ts: i / config.fps }));
  } else if (stat?.isFile() && VIDEO_EXTENSIONS.has(path.extname(config.input).toLowerCase())) {
    sources = extractVideoFrames(config.input, config.fps);
  } else if (stat?.isFile()) {
    sources = [{ file: config.input, ts: 0 }];
  } else {
    throw new UnreadableInput(`input does not exist: ${config.input}`);
  }

  const frames: FrameDetections[] = [];
  let lastTs = -Infinity;
  for (const { file, ts } of sources) {
    const image = decodeImage(file);
    const detections = detector(image).filter((d) => d.conf >= config.confFloor);
    // Guard against containers reporting duplicate presentation times.
    const emitTs = ts > lastTs ? ts : lastTs + 1e-6;
    lastTs = emitTs;
    frames.push({ ts: emitTs, detections });
  }
  return frames;
}

export function writeDetectionsJsonl(outPath: string, frames: FrameDetections[]): void {
  const lines = frames.map(frameToLine).join("\n");
  fs.writeFileSync(outPath, lines.length ? lines + "\n" : "");
}
