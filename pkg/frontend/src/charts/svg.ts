/**
 * Tiny SVG plotting helpers: pure functions from numbers to path/shape
 * data, so they are testable without a DOM. All values plotted come from
 * server responses; the only arithmetic here is pixel mapping and, for
 * density panels, binning the server's own draws for display.
 */

export interface LinearScale {
  (x: number): number;
  domain: [number, number];
  range: [number, number];
}

export function scaleLinear(domain: [number, number], range: [number, number]): LinearScale {
  const [d0, d1] = domain;
  const [r0, r1] = range;
  const span = d1 - d0;
  const fn = ((x: number) => (span === 0 ? (r0 + r1) / 2 : r0 + ((x - d0) / span) * (r1 - r0))) as LinearScale;
  fn.domain = domain;
  fn.range = range;
  return fn;
}

export function extent(values: number[]): [number, number] {
  let lo = Infinity;
  let hi = -Infinity;
  for (const v of values) {
    if (v < lo) lo = v;
    if (v > hi) hi = v;
  }
  if (lo > hi) return [0, 1];
  return lo === hi ? [lo - 0.5, hi + 0.5] : [lo, hi];
}

export function linePath(xs: number[], ys: number[], sx: LinearScale, sy: LinearScale): string {
  if (xs.length === 0) return "";
  const parts: string[] = [];
  for (let i = 0; i < xs.length; i += 1) {
    const cmd = i === 0 ? "M" : "L";
    parts.push(`${cmd}${round2(sx(xs[i]!))},${round2(sy(ys[i]!))}`);
  }
  return parts.join("");
}

export interface Bin {
  x0: number;
  x1: number;
  count: number;
}

/** Equal-width bins over the sample range; counts sum to samples.length. */
export function histogram(samples: number[], bins: number): Bin[] {
  if (samples.length === 0 || bins < 1) return [];
  const [lo, hi] = extent(samples);
  const width = (hi - lo) / bins;
  const out: Bin[] = Array.from({ length: bins }, (_, i) => ({
    x0: lo + i * width,
    x1: lo + (i + 1) * width,
    count: 0,
  }));
  for (const v of samples) {
    const i = Math.min(bins - 1, Math.max(0, Math.floor((v - lo) / width)));
    out[i]!.count += 1;
  }
  return out;
}

export function ticks(lo: number, hi: number, count: number): number[] {
  if (!(hi > lo) || count < 2) return [lo];
  const rawStep = (hi - lo) / (count - 1);
  const mag = 10 ** Math.floor(Math.log10(rawStep));
  const candidates = [1, 2, 2.5, 5, 10].map((m) => m * mag);
  const step = candidates.find((s) => s >= rawStep) ?? rawStep;
  const start = Math.ceil(lo / step) * step;
  const out: number[] = [];
  for (let t = start; t <= hi + step * 1e-9; t += step) {
    out.push(roundTo(t, 10));
  }
  return out;
}

export function formatTick(value: number): string {
  if (Number.isInteger(value)) return String(value);
  const abs = Math.abs(value);
  if (abs >= 0.01) return String(roundTo(value, 4));
  return value.toExponential(1);
}

function round2(x: number): number {
  return Math.round(x * 100) / 100;
}

function roundTo(x: number, digits: number): number {
  const f = 10 ** digits;
  return Math.round(x * f) / f;
}
