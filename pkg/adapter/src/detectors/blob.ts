import type { Detection, RasterImage } from "../types.js";

/**
 * Classical dark-foreground blob detector.
 *
 * Estimates the background level from the image border, thresholds halfway
 * to the darkest pixel, and reports each connected dark component as a
 * "person" candidate whose confidence is its fill density inside the box.
 * Works only under controlled contrast, like other model-based detectors;
 * it exists so the adapter and its fixtures run without model weights.
 */

export interface BlobOptions {
  minArea: number;
  minContrast: number;
}

export const DEFAULT_BLOB_OPTIONS: BlobOptions = { minArea: 12, minContrast: 40 };

function luminance(image: RasterImage): Float32Array {
  const n = image.width * image.height;
  const lum = new Float32Array(n);
  for (let i = 0; i < n; i++) {
    lum[i] =
      0.299 * image.data[4 * i] +
      0.587 * image.data[4 * i + 1] +
      0.114 * image.data[4 * i + 2];
  }
  return lum;
}

function borderMean(lum: Float32Array, w: number, h: number): number {
  let sum = 0;
  let count = 0;
  for (let u = 0; u < w; u++) {
    sum += lum[u] + lum[(h - 1) * w + u];
    count += 2;
  }
  for (let v = 1; v < h - 1; v++) {
    sum += lum[v * w] + lum[v * w + w - 1];
    count += 2;
  }
  return sum / count;
}

export function detectBlobs(image: RasterImage, options: BlobOptions = DEFAULT_BLOB_OPTIONS): Detection[] {
  const { width: w, height: h } = image;
  if (w < 2 || h < 2) return [];
  const lum = luminance(image);
  const background = borderMean(lum, w, h);
  let darkest = Infinity;
  for (let i = 0; i < lum.length; i++) if (lum[i] < darkest) darkest = lum[i];
  if (background - darkest < options.minContrast) return [];

  const threshold = (background + darkest) / 2;
  const seen = new Uint8Array(w * h);
  const stack: number[] = [];
  const detections: Array<Detection & { area: number }> = [];

  for (let start = 0; start < lum.length; start++) {
    if (seen[start] || lum[start] >= threshold) continue;
    let area = 0;
    let uMin = w;
    let uMax = -1;
    let vMin = h;
    let vMax = -1;
    stack.push(start);
    seen[start] = 1;
    while (stack.length) {
      const idx = stack.pop()!;
      const u = idx % w;
      const v = (idx - u) / w;
      area++;
      if (u < uMin) uMin = u;
      if (u > uMax) uMax = u;
      if (v < vMin) vMin = v;
      if (v > vMax) vMax = v;
      if (u > 0 && !seen[idx - 1] && lum[idx - 1] < threshold) {
        seen[idx - 1] = 1;
        stack.push(idx - 1);
      }
      if (u < w - 1 && !seen[idx + 1] && lum[idx + 1] < threshold) {
        seen[idx + 1] = 1;
        stack.push(idx + 1);
      }
      if (v > 0 && !seen[idx - w] && lum[idx - w] < threshold) {
        seen[idx - w] = 1;
        stack.push(idx - w);
      }
      if (v < h - 1 && !seen[idx + w] && lum[idx + w] < threshold) {
        seen[idx + w] = 1;
        stack.push(idx + w);
      }
    }
    if (area < options.minArea) continue;
    const boxArea = (uMax - uMin + 1) * (vMax - vMin + 1);
    detections.push({
      bbox: [uMin, vMin, uMax + 1, vMax + 1],
      label: "person",
      conf: Math.min(1, area / boxArea),
      area,
    });
  }

  detections.sort((a, b) => b.area - a.area);
  return detections.map(({ bbox, label, conf }) => ({ bbox, label, conf }));
}
