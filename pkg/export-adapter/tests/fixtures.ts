import * as fs from "fs";
import * as path from "path";
import * as tf from "@tensorflow/tfjs";

import { saveModel } from "../src/model";
import { RgbImage, writePng } from "../src/png";

/** Deterministic PRNG (mulberry32) so fixtures are reproducible. */
export function makeRng(seed: number): () => number {
  let a = seed >>> 0;
  return () => {
    a |= 0;
    a = (a + 0x6d2b79f5) | 0;
    let t = Math.imul(a ^ (a >>> 15), 1 | a);
    t = (t + Math.imul(t ^ (t >>> 7), 61 | t)) ^ t;
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

export interface Scene {
  image: RgbImage;
  mask: Uint8Array;
  center: { x: number; y: number };
  radius: number;
}

/** Dark underwater-ish background with one bright disk (the "pipe"). */
export function makeScene(rng: () => number, width: number, height: number): Scene {
  const data = new Uint8Array(width * height * 3);
  const mask = new Uint8Array(width * height);
  const radius = 4 + rng() * (Math.min(width, height) / 4);
  const cx = radius + 1 + rng() * (width - 2 * radius - 2);
  const cy = radius + 1 + rng() * (height - 2 * radius - 2);
  for (let y = 0; y < height; y++) {
    for (let x = 0; x < width; x++) {
      const i = y * width + x;
      const inside = (x - cx) ** 2 + (y - cy) ** 2 <= radius * radius;
      mask[i] = inside ? 1 : 0;
      const base = inside ? 200 : 45;
      for (let c = 0; c < 3; c++) {
        data[i * 3 + c] = Math.max(0, Math.min(255, Math.round(base + (rng() - 0.5) * 40)));
      }
    }
  }
  return { image: { width, height, data }, mask, center: { x: cx, y: cy }, radius };
}

function buildModel(): tf.LayersModel {
  // fully convolutional, so it runs at any resolution
  const model = tf.sequential();
  model.add(
    tf.layers.conv2d({
      inputShape: [null as unknown as number, null as unknown as number, 3],
      filters: 8,
      kernelSize: 3,
      padding: "same",
      activation: "relu",
      kernelInitializer: tf.initializers.glorotUniform({ seed: 17 }),
    })
  );
  model.add(
    tf.layers.conv2d({
      filters: 8,
      kernelSize: 3,
      padding: "same",
      activation: "relu",
      kernelInitializer: tf.initializers.glorotUniform({ seed: 18 }),
    })
  );
  model.add(
    tf.layers.conv2d({
      filters: 1,
      kernelSize: 1,
      activation: "sigmoid",
      kernelInitializer: tf.initializers.glorotUniform({ seed: 19 }),
    })
  );
  model.compile({ optimizer: tf.train.adam(0.01), loss: "binaryCrossentropy" });
  return model;
}

/** Train the toy segmenter on synthetic scenes and save it to modelDir. */
export async function trainAndSaveModel(modelDir: string): Promise<{ firstLoss: number; lastLoss: number }> {
  const rng = makeRng(1234);
  const size = 24;
  const n = 48;
  const xs = new Float32Array(n * size * size * 3);
  const ys = new Float32Array(n * size * size);
  for (let k = 0; k < n; k++) {
    const scene = makeScene(rng, size, size);
    for (let i = 0; i < size * size * 3; i++) {
      xs[k * size * size * 3 + i] = scene.image.data[i] / 255;
    }
    for (let i = 0; i < size * size; i++) {
      ys[k * size * size + i] = scene.mask[i];
    }
  }
  const xT = tf.tensor4d(xs, [n, size, size, 3]);
  const yT = tf.tensor4d(ys, [n, size, size, 1]);
  const model = buildModel();
  const history = await model.fit(xT, yT, { epochs: 6, batchSize: 8, shuffle: false, verbose: 0 });
  xT.dispose();
  yT.dispose();
  const losses = history.history["loss"] as number[];
  await saveModel(model, modelDir);
  return { firstLoss: losses[0], lastLoss: losses[losses.length - 1] };
}

/** 16-gon approximation of the scene disk, in normalized coordinates. */
export function discLabelLine(scene: Scene): string {
  const { center, radius } = scene;
  const w = scene.image.width;
  const h = scene.image.height;
  const coords: string[] = [];
  for (let k = 0; k < 16; k++) {
    const angle = (2 * Math.PI * k) / 16;
    const x = Math.min(Math.max(center.x + radius * Math.cos(angle), 0), w);
    const y = Math.min(Math.max(center.y + radius * Math.sin(angle), 0), h);
    coords.push((x / w).toFixed(8), (y / h).toFixed(8));
  }
  return `0 ${coords.join(" ")}`;
}

export interface Dataset {
  imageDir: string;
  manifestPath: string;
}

/** Scene PNGs + labels + a manifest the evaluator can consume directly. */
export function writeDataset(root: string, scenes: Scene[], split: string | null = "test"): Dataset {
  const imageDir = path.join(root, "images");
  fs.mkdirSync(imageDir, { recursive: true });
  const entries = [];
  for (let i = 0; i < scenes.length; i++) {
    const stem = String(i).padStart(6, "0");
    writePng(path.join(imageDir, `${stem}.png`), scenes[i].image);
    fs.writeFileSync(path.join(imageDir, `${stem}.txt`), discLabelLine(scenes[i]) + "\n");
    entries.push({
      index: i,
      image_path: `images/${stem}.png`,
      label_path: `images/${stem}.txt`,
      width: scenes[i].image.width,
      height: scenes[i].image.height,
      split,
    });
  }
  const manifestPath = path.join(root, "manifest.json");
  fs.writeFileSync(
    manifestPath,
    JSON.stringify(
      {
        source_root: root,
        created_at: "2024-01-01T00:00:00+00:00",
        excluded: [],
        entries,
      },
      null,
      2
    )
  );
  return { imageDir, manifestPath };
}
