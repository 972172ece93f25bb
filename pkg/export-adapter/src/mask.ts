/** Mask post-processing: thresholding and connected-component labeling. */

export function thresholdMask(prob: Float32Array, threshold: number): Uint8Array {
  const out = new Uint8Array(prob.length);
  for (let i = 0; i < prob.length; i++) {
    out[i] = prob[i] >= threshold ? 1 : 0;
  }
  return out;
}

export interface Component {
  pixels: number[]; // linear indices, ascending
}

/** 8-connected components of a binary mask, in first-pixel scan order. */
export function connectedComponents(mask: Uint8Array, width: number, height: number): Component[] {
  const labels = new Int32Array(mask.length).fill(-1);
  const components: Component[] = [];
  const stack: number[] = [];
  for (let start = 0; start < mask.length; start++) {
    if (!mask[start] || labels[start] >= 0) continue;
    const id = components.length;
    const pixels: number[] = [];
    stack.push(start);
    labels[start] = id;
    while (stack.length) {
      const idx = stack.pop()!;
      pixels.push(idx);
      const x = idx % width;
      const y = (idx - x) / width;
      for (let dy = -1; dy <= 1; dy++) {
        for (let dx = -1; dx <= 1; dx++) {
          if (!dx && !dy) continue;
          const nx = x + dx;
          const ny = y + dy;
          if (nx < 0 || ny < 0 || nx >= width || ny >= height) continue;
          const nidx = ny * width + nx;
          if (mask[nidx] && labels[nidx] < 0) {
            labels[nidx] = id;
            stack.push(nidx);
          }
        }
      }
    }
    pixels.sort((a, b) => a - b);
    components.push({ pixels });
  }
  return components;
}

export function componentMask(component: Component, size: number): Uint8Array {
  const out = new Uint8Array(size);
  for (const idx of component.pixels) out[idx] = 1;
  return out;
}

export function meanProbability(component: Component, prob: Float32Array): number {
  let sum = 0;
  for (const idx of component.pixels) sum += prob[idx];
  return sum / component.pixels.length;
}
