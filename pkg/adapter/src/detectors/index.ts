import { ModelLoadFailure } from "../errors.js";
import type { Detection, RasterImage } from "../types.js";
import { detectBlobs } from "./blob.js";

export type Detector = (image: RasterImage) => Detection[];

/**
 * Detector registry keyed by model identifier. The pipeline downstream is
 * detector-agnostic (it consumes the neutral JSONL format), so new backends
 * only need to register here; person selection and coordinate mapping stay
 * out of the adapter by design.
 */
const REGISTRY: Record<string, () => Detector> = {
  blob: () => (image) => detectBlobs(image),
};

export function availableModels(): string[] {
  return Object.keys(REGISTRY).sort();
}

export function loadModel(identifier: string): Detector {
  const factory = REGISTRY[identifier];
  if (!factory) {
    throw new ModelLoadFailure(
      `unknown model '${identifier}' (available: ${availableModels().join(", ")})`,
    );
  }
  try {
    return factory();
  } catch (err) {
    throw new ModelLoadFailure(`model '${identifier}' failed to load: ${(err as Error).message}`);
  }
}
