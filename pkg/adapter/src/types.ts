import { z } from "zod";

/** Decoded raster frame, 8-bit RGBA, row-major. */
export interface RasterImage {
  width: number;
  height: number;
  /** RGBA bytes, length = width * height * 4. */
  data: Uint8Array;
}

export interface Detection {
  /** [uMin, vMin, uMax, vMax] in pixels, origin top-left, v down. */
  bbox: [number, number, number, number];
  label: string;
  conf: number;
}

export interface FrameDetections {
  ts: number;
  detections: Detection[];
}

export interface AdapterConfig {
  /** Image directory or video file. */
  input: string;
  /** Detector identifier; see detectors/index.ts for the registry. */
  model: string;
  /** Detections below this confidence are not emitted. */
  confFloor: number;
  /** Frame rate used to synthesize timestamps when the container has none. */
  fps: number;
}

/** Wire schema of one output line; matches the pipeline's detection input. */
export const frameSchema = z.object({
  ts: z.number().finite(),
  detections: z.array(
    z.object({
      bbox: z.tuple([z.number(), z.number(), z.number(), z.number()]),
      label: z.string(),
      conf: z.number().min(0).max(1),
    }),
  ),
});

export function frameToLine(frame: FrameDetections): string {
  return JSON.stringify({
    ts: frame.ts,
    detections: frame.detections.map((d) => ({
      bbox: d.bbox,
      label: d.label,
      conf: d.conf,
    })),
  });
}
