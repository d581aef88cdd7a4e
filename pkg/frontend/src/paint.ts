/**
 * Canvas painters. They take the smallest context interface that covers what
 * they draw, so tests can pass a recording stub instead of a real canvas.
 */

import type { HeatmapModel } from "./heatmap.js";
import type { SurfaceQuad } from "./surface.js";

export interface Canvas2D {
  fillStyle: string;
  strokeStyle: string;
  lineWidth: number;
  clearRect(x: number, y: number, w: number, h: number): void;
  fillRect(x: number, y: number, w: number, h: number): void;
  beginPath(): void;
  moveTo(x: number, y: number): void;
  lineTo(x: number, y: number): void;
  closePath(): void;
  fill(): void;
  stroke(): void;
  arc(x: number, y: number, r: number, a0: number, a1: number): void;
}

export const MARKER_COLORS = {
  computed: "#1b1b1b",
  copied: "#f2a0a0",
} as const;

/** First free axis runs left to right, second bottom to top. */
export function paintHeatmap(ctx: Canvas2D, model: HeatmapModel, width: number, height: number): void {
  ctx.clearRect(0, 0, width, height);
  const cw = width / model.cols;
  const ch = height / model.rows;
  for (const cell of model.cells) {
    if (cell.fill === null) continue;
    const x = cell.i * cw;
    const y = height - (cell.j + 1) * ch;
    ctx.fillStyle = cell.fill;
    ctx.fillRect(x, y, cw + 0.5, ch + 0.5);
  }
  const r = Math.max(1.5, Math.min(cw, ch) * 0.16);
  for (const cell of model.cells) {
    if (cell.marker === null) continue;
    const cx = (cell.i + 0.5) * cw;
    const cy = height - (cell.j + 0.5) * ch;
    ctx.fillStyle = MARKER_COLORS[cell.marker];
    ctx.beginPath();
    ctx.arc(cx, cy, r, 0, 2 * Math.PI);
    ctx.fill();
  }
}

export function paintSurface(ctx: Canvas2D, quads: SurfaceQuad[], width: number, height: number): void {
  ctx.clearRect(0, 0, width, height);
  // unit coordinates from buildSurface: x in [-cos30, cos30], y in [0, 1 + HEIGHT]
  const sx = width / 2.1;
  const sy = height / 1.8;
  const ox = width / 2;
  const oy = height * 0.08;
  ctx.lineWidth = 0.5;
  ctx.strokeStyle = "rgba(0,0,0,0.35)";
  for (const quad of quads) {
    ctx.fillStyle = quad.fill;
    ctx.beginPath();
    quad.points.forEach(([px, py], k) => {
      const x = ox + px * sx;
      const y = oy + py * sy;
      if (k === 0) ctx.moveTo(x, y);
      else ctx.lineTo(x, y);
    });
    ctx.closePath();
    ctx.fill();
    ctx.stroke();
  }
}
