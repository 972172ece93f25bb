#!/usr/bin/env node

import { exportPredictions } from "./export";

const USAGE = `usage: pipeseg-export --model <dir> --images <dir> --out <dir>
                      [--conf-floor F] [--threshold F] [--min-area N]

Runs a saved segmentation model over every PNG in --images and writes one
prediction JSON per image into --out, in the evaluator's schema.`;

function parseArgs(argv: string[]) {
  const args: Record<string, string> = {};
  for (let i = 0; i < argv.length; i++) {
    const key = argv[i];
    if (!key.startsWith("--")) throw new Error(`unexpected argument ${key}`);
    const value = argv[i + 1];
    if (value === undefined) throw new Error(`missing value for ${key}`);
    args[key.slice(2)] = value;
    i++;
  }
  return args;
}

async function main(): Promise<number> {
  let args: Record<string, string>;
  try {
    args = parseArgs(process.argv.slice(2));
    for (const required of ["model", "images", "out"]) {
      if (!(required in args)) throw new Error(`--${required} is required`);
    }
  } catch (err) {
    console.error(String(err));
    console.error(USAGE);
    return 2;
  }

  try {
    const report = await exportPredictions({
      modelDir: args["model"],
      imageDir: args["images"],
      outDir: args["out"],
      confFloor: args["conf-floor"] !== undefined ? Number(args["conf-floor"]) : undefined,
      threshold: args["threshold"] !== undefined ? Number(args["threshold"]) : undefined,
      minArea: args["min-area"] !== undefined ? Number(args["min-area"]) : undefined,
    });
    console.log(`wrote ${report.written.length} prediction files to ${args["out"]}`);
    for (const failure of report.failures) {
      console.error(`failed ${failure.image}: ${failure.error}`);
    }
    return report.failures.length ? 1 : 0;
  } catch (err) {
    console.error(String(err));
    return 1;
  }
}

main().then((code) => {
  process.exitCode = code;
});
