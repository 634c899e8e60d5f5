import * as fs from "node:fs";
import * as path from "node:path";

import { encodePng } from "../src/image.js";
import type { RasterImage } from "../src/types.js";

export interface PersonSpec {
  /** Bottom-center of the figure in pixels. */
  u: number;
  v: number;
  width: number;
  height: number;
}

/** Flat light background with optional dark person-shaped rectangles. */
export function renderFrame(
  width: number,
  height: number,
  people: PersonSpec[],
  background = 230,
  foreground = 30,
): RasterImage {
  const data = new Uint8Array(width * height * 4);
  for (let i = 0; i < width * height; i++) {
    data[4 * i] = background;
    data[4 * i + 1] = background;
    data[4 * i + 2] = background;
    data[4 * i + 3] = 255;
  }
  for (const person of people) {
    const u0 = Math.max(0, Math.round(person.u - person.width / 2));
    const u1 = Math.min(width - 1, Math.round(person.u + person.width / 2));
    const v0 = Math.max(0, Math.round(person.v - person.height));
    const v1 = Math.min(height - 1, Math.round(person.v));
    for (let v = v0; v <= v1; v++) {
      for (let u = u0; u <= u1; u++) {
        const i = v * width + u;
        data[4 * i] = foreground;
        data[4 * i + 1] = foreground;
        data[4 * i + 2] = foreground;
      }
    }
  }
  return { width, height, data };
}

/**
 * Ten-frame clip of one figure walking left to right; frame index
 * `emptyFrame` (when set) is rendered without the person.
 */
export function writeClip(dir: string, frames = 10, emptyFrame?: number): void {
  fs.mkdirSync(dir, { recursive: true });
  for (let i = 0; i < frames; i++) {
    const people: PersonSpec[] =
      i === emptyFrame ? [] : [{ u: 40 + i * 22, v: 180 + i, width: 24, height: 70 }];
    const image = renderFrame(320, 240, people);
    fs.writeFileSync(path.join(dir, `frame_${String(i).padStart(3, "0")}.png`), encodePng(image));
  }
}
