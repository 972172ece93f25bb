import * as fs from "fs";
import * as path from "path";

import { componentMask, connectedComponents, meanProbability, thresholdMask } from "./mask";
import { SegmentationModel, TfjsSegmenter } from "./model";
import { readPng } from "./png";
import { encodeRle } from "./rle";

export interface ExportJob {
  modelDir: string;
  imageDir: string;
  outDir: string;
  /** Instances below this confidence are dropped. */
  confFloor?: number;
  /** Foreground probability threshold for the binary mask. */
  threshold?: number;
  /** Components smaller than this pixel count are dropped as specks. */
  minArea?: number;
}

export interface ExportFailure {
  image: string;
  error: string;
}

export interface ExportReport {
  written: string[];
  failures: ExportFailure[];
}

interface InstanceJson {
  class_id: number;
  confidence: number;
  rle: number[];
}

export function imageToInstances(
  prob: Float32Array,
  width: number,
  height: number,
  threshold: number,
  confFloor: number,
  minArea: number
): InstanceJson[] {
  const mask = thresholdMask(prob, threshold);
  const instances: InstanceJson[] = [];
  for (const component of connectedComponents(mask, width, height)) {
    if (component.pixels.length < minArea) continue;
    const confidence = Math.min(meanProbability(component, prob), 1);
    if (confidence < confFloor) continue;
    instances.push({
      class_id: 0,
      confidence,
      rle: encodeRle(componentMask(component, width * height)),
    });
  }
  return instances;
}

/**
 * Run the model over every PNG in the image directory and write one
 * prediction JSON per image, conforming to the evaluator's schema. An
 * image with no detections still produces a file with an empty instance
 * list; per-image failures are recorded and skipped.
 */
export async function exportPredictions(
  job: ExportJob,
  model?: SegmentationModel
): Promise<ExportReport> {
  const confFloor = job.confFloor ?? 0.01;
  const threshold = job.threshold ?? 0.5;
  const minArea = job.minArea ?? 1;
  if (confFloor < 0 || confFloor >= 1) {
    throw new Error(`confFloor must be in [0, 1), got ${confFloor}`);
  }
  const segmenter = model ?? (await TfjsSegmenter.load(job.modelDir));
  const names = fs
    .readdirSync(job.imageDir)
    .filter((n) => n.toLowerCase().endsWith(".png"))
    .sort();
  fs.mkdirSync(job.outDir, { recursive: true });

  const report: ExportReport = { written: [], failures: [] };
  for (const name of names) {
    try {
      const image = readPng(path.join(job.imageDir, name));
      const prob = await segmenter.predict(image);
      const instances = imageToInstances(
        prob.values,
        image.width,
        image.height,
        threshold,
        confFloor,
        minArea
      );
      const doc = {
        image: name,
        width: image.width,
        height: image.height,
        instances,
      };
      const stem = name.replace(/\.png$/i, "");
      const outPath = path.join(job.outDir, `${stem}.json`);
      fs.writeFileSync(outPath, JSON.stringify(doc));
      report.written.push(outPath);
    } catch (err) {
      report.failures.push({ image: name, error: String(err) });
    }
  }
  return report;
}
