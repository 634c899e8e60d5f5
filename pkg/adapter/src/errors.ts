/** Adapter errors mapped to distinct process exit codes. */

export class AdapterError extends Error {
  readonly exitCode: number = 1;

  get codeName(): string {
    return this.constructor.name;
  }
}

/** The input path is missing, unsupported, or a decoder failed on it. */
export class UnreadableInput extends AdapterError {
  override readonly exitCode = 50;
}

/** The requested model identifier is unknown or failed to initialize. */
export class ModelLoadFailure extends AdapterError {
  override readonly exitCode = 51;
}
