#!/usr/bin/env node
import yargs from "yargs";
import { hideBin } from "yargs/helpers";

import { DEFAULT_CONFIG, detectStream, writeDetectionsJsonl } from "./adapter.js";
import { availableModels } from "./detectors/index.js";
import { AdapterError } from "./errors.js";

async function main(): Promise<number> {
  const argv = await yargs(hideBin(process.argv))
    .scriptName("lofi-detect")
    .usage("$0 --input <path> --out <jsonl> [--conf-floor 0.25] [--fps 26] [--model blob]")
    .option("input", { type: "string", demandOption: true, describe: "image directory or video file" })
    .option("out", { type: "string", demandOption: true, describe: "detection JSON Lines output path" })
    .option("conf-floor", { type: "number", default: DEFAULT_CONFIG.confFloor })
    .option("fps", {
      type: "number",
      default: DEFAULT_CONFIG.fps,
      describe: "timestamp rate for inputs without container timestamps",
    })
    .option("model", {
      type: "string",
      default: DEFAULT_CONFIG.model,
      describe: `detector identifier (${availableModels().join(", ")})`,
    })
    .option("quiet", { type: "boolean", default: false })
    .strict()
    .help()
    .parse();

  const frames = detectStream({
    input: argv.input,
    model: argv.model,
    confFloor: argv["conf-floor"],
    fps: argv.fps,
  });
  writeDetectionsJsonl(argv.out, frames);
  if (!argv.quiet) {
    const withHits = frames.filter((f) => f.detections.length > 0).length;
    console.error(`lofi-detect: ${frames.length} frames, ${withHits} with detections -> ${argv.out}`);
  }
  return 0;
}

main()
  .then((code) => process.exit(code))
  .catch((err) => {
    if (err instanceof AdapterError) {
      console.error(`lofi-detect: error: ${err.codeName}: ${err.message}`);
      process.exit(err.exitCode);
    }
    console.error(`lofi-detect: error: ${err?.stack ?? err}`);
    process.exit(1);
  });
