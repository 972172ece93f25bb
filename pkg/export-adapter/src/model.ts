import * as fs from "fs";
import * as path from "path";
import * as tf from "@tensorflow/tfjs";

import { RgbImage } from "./png";

/** Per-pixel foreground probability at the source image's resolution. */
export interface ProbabilityMap {
  width: number;
  height: number;
  values: Float32Array;
}

export interface SegmentationModel {
  predict(image: RgbImage): Promise<ProbabilityMap>;
}

const MODEL_JSON = "model.json";
const WEIGHTS_BIN = "weights.bin";

/**
 * Persist a LayersModel as model.json + weights.bin. The browser-oriented
 * tfjs build has no file:// IO handler, so the adapter carries its own
 * trivial on-disk format.
 */
export async function saveModel(model: tf.LayersModel, dir: string): Promise<void> {
  fs.mkdirSync(dir, { recursive: true });
  await model.save(
    tf.io.withSaveHandler(async (artifacts) => {
      fs.writeFileSync(
        path.join(dir, MODEL_JSON),
        JSON.stringify({
          modelTopology: artifacts.modelTopology,
          weightSpecs: artifacts.weightSpecs,
        })
      );
      fs.writeFileSync(path.join(dir, WEIGHTS_BIN), Buffer.from(artifacts.weightData as ArrayBuffer));
      return {
        modelArtifactsInfo: {
          dateSaved: new Date(),
          modelTopologyType: "JSON",
        },
      };
    })
  );
}

export async function loadModel(dir: string): Promise<tf.LayersModel> {
  const meta = JSON.parse(fs.readFileSync(path.join(dir, MODEL_JSON), "utf-8"));
  const weights = fs.readFileSync(path.join(dir, WEIGHTS_BIN));
  const weightData = weights.buffer.slice(
    weights.byteOffset,
    weights.byteOffset + weights.byteLength
  );
  return tf.loadLayersModel(
    tf.io.fromMemory({
      modelTopology: meta.modelTopology,
      weightSpecs: meta.weightSpecs,
      weightData,
    })
  );
}

/**
 * Wraps a tfjs LayersModel with 3-channel input and single-channel
 * sigmoid output. Models with a fixed spatial input size get their input
 * resized and the probability map bilinearly resized back to native
 * resolution, so exported masks always match the source image grid.
 */
export class TfjsSegmenter implements SegmentationModel {
  constructor(private readonly model: tf.LayersModel) {}

  static async load(dir: string): Promise<TfjsSegmenter> {
    return new TfjsSegmenter(await loadModel(dir));
  }

  async predict(image: RgbImage): Promise<ProbabilityMap> {
    const { width, height } = image;
    const out = tf.tidy(() => {
      const floats = new Float32Array(image.data.length);
      for (let i = 0; i < image.data.length; i++) floats[i] = image.data[i] / 255;
      let input = tf.tensor4d(floats, [1, height, width, 3]);
      const shape = this.model.inputs[0].shape; // [batch, h, w, c]
      const fixedH = shape[1];
      const fixedW = shape[2];
      const needsResize =
        fixedH != null && fixedW != null && (fixedH !== height || fixedW !== width);
      if (needsResize) {
        input = tf.image.resizeBilinear(input, [fixedH as number, fixedW as number]);
      }
      let prob = this.model.predict(input) as tf.Tensor4D;
      if (prob.shape[1] !== height || prob.shape[2] !== width) {
        prob = tf.image.resizeBilinear(prob, [height, width]);
      }
      return prob.reshape([height, width]);
    });
    const values = (await out.data()) as Float32Array;
    out.dispose();
    return { width, height, values };
  }
}
