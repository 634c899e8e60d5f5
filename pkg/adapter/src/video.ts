import { spawnSync } from "node:child_process";
import * as fs from "node:fs";
import * as os from "node:os";
import * as path from "node:path";

import { UnreadableInput } from "./errors.js";

export const VIDEO_EXTENSIONS = new Set([".mp4", ".mkv", ".avi", ".mov", ".webm"]);

export interface ExtractedFrame {
  file: string;
  /** Presentation timestamp in seconds, from container metadata. */
  ts: number;
}

/**
 * Parse frame timestamps from ffmpeg's showinfo filter output, lines like
 * "[Parsed_showinfo_0 @ 0x...] n:  12 ... pts_time:0.48 ...".
 */
export function parseShowInfo(stderr: string): Map<number, number> {
  const re = /\bn:\s*(\d+)\b.*?\bpts_time:\s*([0-9.eE+-]+)/;
  const out = new Map<number, number>();
  for (const line of stderr.split("\n")) {
    const m = re.exec(line);
    if (!m) continue;
    const n = Number.parseInt(m[1], 10);
    const ts = Number.parseFloat(m[2]);
    if (Number.isFinite(n) && Number.isFinite(ts)) out.set(n, ts);
  }
  return out;
}

export function ffmpegAvailable(): boolean {
  const probe = spawnSync("ffmpeg", ["-version"], { stdio: "ignore" });
  return probe.status === 0;
}

/**
 * Decode a video into PNG frames plus container timestamps. Timestamps fall
 * back to frame_index / fps when the container reports none.
 */
export function extractVideoFrames(input: string, fps: number): ExtractedFrame[] {
  if (!fs.existsSync(input)) {
    throw new UnreadableInput(`video file does not exist: ${input}`);
  }
  if (!ffmpegAvailable()) {
    throw new UnreadableInput(
      "video input requires ffmpeg on PATH; decode to an image directory instead",
    );
  }
  const tmp = fs.mkdtempSync(path.join(os.tmpdir(), "lofi-detect-"));
  const result = spawnSync(
    "ffmpeg",
    ["-hide_banner", "-i", input, "-vf", "showinfo", "-vsync", "0", path.join(tmp, "frame_%06d.png")],
    { encoding: "utf8", maxBuffer: 64 * 1024 * 1024 },
  );
  if (result.status !== 0) {
    throw new UnreadableInput(`ffmpeg failed on ${input}: ${result.stderr?.slice(-400)}`);
  }
  const timestamps = parseShowInfo(result.stderr ?? "");
  const files = fs
    .readdirSync(tmp)
    .filter((f) => f.endsWith(".png"))
    .sort();
  return files.map((file, i) => ({
    file: path.join(tmp, file),
    ts: timestamps.get(i) ?? i / fps,
  }));
}
