/**
 * Render model for a slice payload.
 *
 * buildHeatmap turns a payload into a grid of cells with a fill color and an
 * optional flag marker. It copies the payload's numbers through untouched:
 * the viewer computes colors and geometry, never values. Cells with no value
 * stay blank (fill null). With the overlay on, exactly computed points get a
 * dark marker and copied points a light red one; interpolated cells carry a
 * color but no marker.
 */

import { colorFor, valueBounds, type ScaleBounds } from "./color.js";
import type { Flag, SlicePayload } from "./types.js";

export type Marker = "computed" | "copied" | null;

export interface HeatmapCell {
  /** column index along the first free axis */
  i: number;
  /** row index along the second free axis */
  j: number;
  value: number | null;
  flag: Flag;
  fill: string | null;
  marker: Marker;
}

export interface HeatmapModel {
  axes: [string, string];
  fixed: Record<string, number>;
  xValues: number[];
  yValues: number[];
  cols: number;
  rows: number;
  bounds: ScaleBounds | null;
  overlay: boolean;
  cells: HeatmapCell[];
}

export interface HeatmapOptions {
  overlay: boolean;
  scale?: ScaleBounds | null;
}

function markerFor(flag: Flag, overlay: boolean): Marker {
  if (!overlay) return null;
  if (flag === "computed") return "computed";
  if (flag === "copied") return "copied";
  return null;
}

export function buildHeatmap(slice: SlicePayload, opts: HeatmapOptions): HeatmapModel {
  const bounds = opts.scale ?? valueBounds(slice.values);
  const cols = slice.axis_values[0].length;
  const rows = slice.axis_values[1].length;
  const cells: HeatmapCell[] = [];
  for (let i = 0; i < cols; i++) {
    for (let j = 0; j < rows; j++) {
      const value = slice.values[i][j];
      const flag = slice.flags[i][j];
      cells.push({
        i,
        j,
        value,
        flag,
        fill: value === null || bounds === null ? null : colorFor(value, bounds),
        marker: markerFor(flag, opts.overlay),
      });
    }
  }
  return {
    axes: [slice.axes[0], slice.axes[1]],
    fixed: slice.fixed,
    xValues: slice.axis_values[0],
    yValues: slice.axis_values[1],
    cols,
    rows,
    bounds,
    overlay: opts.overlay,
    cells,
  };
}

/** The value grid exactly as rendered, for comparison against payloads. */
export function modelValues(model: HeatmapModel): (number | null)[][] {
  const out: (number | null)[][] = [];
  for (let i = 0; i < model.cols; i++) out.push(new Array(model.rows).fill(null));
  for (const cell of model.cells) out[cell.i][cell.j] = cell.value;
  return out;
}

/** Flag markers as a grid, mirroring modelValues. */
export function modelMarkers(model: HeatmapModel): Marker[][] {
  const out: Marker[][] = [];
  for (let i = 0; i < model.cols; i++) out.push(new Array(model.rows).fill(null));
  for (const cell of model.cells) out[cell.i][cell.j] = cell.marker;
  return out;
}
