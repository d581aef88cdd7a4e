/** Color scale for the heatmap. */

export interface ScaleBounds {
  lo: number;
  hi: number;
}

/** Min/max over the non-null entries, or null when nothing is known. */
export function valueBounds(values: (number | null)[][]): ScaleBounds | null {
  let lo = Infinity;
  let hi = -Infinity;
  for (const row of values) {
    for (const v of row) {
      if (v === null) continue;
      if (v < lo) lo = v;
      if (v > hi) hi = v;
    }
  }
  if (lo === Infinity) return null;
  return { lo, hi };
}

// Dark blue to yellow, a handful of stops, linear in RGB between them.
const STOPS: [number, number, number][] = [
  [13, 8, 135],
  [84, 39, 143],
  [158, 60, 97],
  [216, 110, 46],
  [244, 178, 30],
  [240, 249, 33],
];

export function colorFor(value: number, bounds: ScaleBounds): string {
  let t: number;
  if (bounds.hi === bounds.lo) {
    t = 0.5;
  } else {
    t = (value - bounds.lo) / (bounds.hi - bounds.lo);
    t = Math.min(Math.max(t, 0), 1);
  }
  const x = t * (STOPS.length - 1);
  const k = Math.min(Math.floor(x), STOPS.length - 2);
  const f = x - k;
  const a = STOPS[k];
  const b = STOPS[k + 1];
  const r = Math.round(a[0] + f * (b[0] - a[0]));
  const g = Math.round(a[1] + f * (b[1] - a[1]));
  const bl = Math.round(a[2] + f * (b[2] - a[2]));
  return `rgb(${r},${g},${bl})`;
}
