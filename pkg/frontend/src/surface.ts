/**
 * Optional 3-D view: projects the heatmap's value grid to isometric quads.
 * Pure geometry on the already-fetched values; quads with any unknown corner
 * are skipped rather than invented.
 */

import { colorFor } from "./color.js";
import { modelValues, type HeatmapModel } from "./heatmap.js";

export interface SurfaceQuad {
  /** projected corner coordinates in unit space, x in [-1, 1], y in [0, ~1.5] */
  points: [number, number][];
  fill: string;
  /** larger is nearer the viewer; paint ascending */
  depth: number;
}

const COS30 = Math.cos(Math.PI / 6);
const SIN30 = 0.5;
const HEIGHT = 0.55;

function project(u: number, v: number, h: number): [number, number] {
  return [(u - v) * COS30, (u + v) * SIN30 + (1 - h) * HEIGHT];
}

export function buildSurface(model: HeatmapModel): SurfaceQuad[] {
  const values = modelValues(model);
  const { cols, rows, bounds } = model;
  if (bounds === null || cols < 2 || rows < 2) return [];
  const span = bounds.hi === bounds.lo ? 1 : bounds.hi - bounds.lo;
  const t = (v: number) => (bounds.hi === bounds.lo ? 0.5 : (v - bounds.lo) / span);

  const quads: SurfaceQuad[] = [];
  for (let i = 0; i < cols - 1; i++) {
    for (let j = 0; j < rows - 1; j++) {
      const corners = [
        [i, j],
        [i + 1, j],
        [i + 1, j + 1],
        [i, j + 1],
      ] as const;
      const vals = corners.map(([ci, cj]) => values[ci][cj]);
      if (vals.some((v) => v === null)) continue;
      const points = corners.map(([ci, cj], k) =>
        project(ci / (cols - 1), cj / (rows - 1), t(vals[k] as number)),
      ) as [number, number][];
      quads.push({
        points,
        fill: colorFor(vals[0] as number, bounds),
        depth: i + j,
      });
    }
  }
  quads.sort((a, b) => a.depth - b.depth);
  return quads;
}
