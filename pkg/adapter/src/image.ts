import * as fs from "node:fs";
import * as path from "node:path";

import pngjs from "pngjs";

import { UnreadableInput } from "./errors.js";
import type { RasterImage } from "./types.js";

const { PNG } = pngjs;

export const IMAGE_EXTENSIONS = new Set([".png", ".ppm"]);

export function listFrameFiles(dir: string): string[] {
  let entries: string[];
  try {
    entries = fs.readdirSync(dir);
  } catch (err) {
    throw new UnreadableInput(`cannot list ${dir}: ${(err as Error).message}`);
  }
  const frames = entries
    .filter((name) => IMAGE_EXTENSIONS.has(path.extname(name).toLowerCase()))
    .sort();
  if (frames.length === 0) {
    throw new UnreadableInput(`no .png or .ppm frames in ${dir}`);
  }
  return frames.map((name) => path.join(dir, name));
}

export function decodeImage(file: string): RasterImage {
  let buf: Buffer;
  try {
    buf = fs.readFileSync(file);
  } catch (err) {
    throw new UnreadableInput(`cannot read ${file}: ${(err as Error).message}`);
  }
  const ext = path.extname(file).toLowerCase();
  if (ext === ".png") return decodePng(buf, file);
  if (ext === ".ppm") return decodePpm(buf, file);
  throw new UnreadableInput(`unsupported image type: ${file}`);
}

function decodePng(buf: Buffer, file: string): RasterImage {
  try {
    const png = PNG.sync.read(buf);
    return { width: png.width, height: png.height, data: new Uint8Array(png.data) };
  } catch (err) {
    throw new UnreadableInput(`invalid PNG ${file}: ${(err as Error).message}`);
  }
}

/** Minimal binary PPM (P6, maxval 255) decoder; keeps fixtures dependency-free. */
function decodePpm(buf: Buffer, file: string): RasterImage {
  const header: number[] = [];
  let pos = 0;
  // Header tokens: magic, width, height, maxval; '#' starts a comment.
  let magic = "";
  while (header.length < 3 && pos < buf.length) {
    while (pos < buf.length && /\s/.test(String.fromCharCode(buf[pos]))) pos++;
    if (buf[pos] === 0x23) {
      while (pos < buf.length && buf[pos] !== 0x0a) pos++;
      continue;
    }
    let token = "";
    while (pos < buf.length && !/\s/.test(String.fromCharCode(buf[pos]))) {
      token += String.fromCharCode(buf[pos]);
      pos++;
    }
    if (!magic) {
      magic = token;
      if (magic !== "P6") throw new UnreadableInput(`not a P6 PPM: ${file}`);
    } else {
      header.push(Number(token));
    }
  }
  const [width, height, maxval] = header;
  pos++; // single whitespace after maxval
  if (!Number.isInteger(width) || !Number.isInteger(height) || maxval !== 255) {
    throw new UnreadableInput(`unsupported PPM header in ${file}`);
  }
  const expected = width * height * 3;
  if (buf.length - pos < expected) {
    throw new UnreadableInput(`truncated PPM payload in ${file}`);
  }
  const data = new Uint8Array(width * height * 4);
  for (let i = 0; i < width * height; i++) {
    data[4 * i] = buf[pos + 3 * i];
    data[4 * i + 1] = buf[pos + 3 * i + 1];
    data[4 * i + 2] = buf[pos + 3 * i + 2];
    data[4 * i + 3] = 255;
  }
  return { width, height, data };
}

export function encodePng(image: RasterImage): Buffer {
  const png = new PNG({ width: image.width, height: image.height });
  Buffer.from(image.data).copy(png.data);
  return PNG.sync.write(png);
}
