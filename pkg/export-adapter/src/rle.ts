/**
 * Run-length coding of binary masks, matching the evaluator's convention
 * bit-exactly: row-major scan, background run first (a leading 0 when the
 * mask starts on foreground), plain integer counts summing to width*height.
 */

export function encodeRle(mask: Uint8Array): number[] {
  const counts: number[] = [];
  let current = 0; // runs alternate starting with background
  let run = 0;
  for (let i = 0; i < mask.length; i++) {
    const v = mask[i] ? 1 : 0;
    if (v === current) {
      run++;
    } else {
      counts.push(run);
      current = v;
      run = 1;
    }
  }
  counts.push(run);
  return counts;
}

export function decodeRle(counts: number[], width: number, height: number): Uint8Array {
  let total = 0;
  for (const c of counts) {
    if (c < 0 || !Number.isInteger(c)) {
      throw new Error(`run lengths must be nonnegative integers, got ${c}`);
    }
    total += c;
  }
  if (total !== width * height) {
    throw new Error(`run lengths sum to ${total}, expected ${width * height}`);
  }
  const out = new Uint8Array(width * height);
  let pos = 0;
  let fg = 0;
  for (const c of counts) {
    if (fg) out.fill(1, pos, pos + c);
    pos += c;
    fg = 1 - fg;
  }
  return out;
}
