/**
 * View state and its URL codec.
 *
 * Everything the viewer shows is a function of this state plus service
 * payloads, and the whole state round-trips through the query string, so a
 * URL is a shareable session. Slider positions are grid indices, not
 * parameter values; the mapping to values happens against the selected
 * run's own axes.
 */

import type { AxisSpec } from "./types.js";

export interface ViewState {
  runId: string | null;
  /** the two free axes of the displayed slice, always distinct */
  axes: [string, string] | null;
  /** fixed-axis slider positions as grid indices */
  sliders: Record<string, number>;
  /** whether computed/copied markers are drawn on top of the heatmap */
  overlay: boolean;
  /** color scale bounds, or null for auto from the current slice */
  scale: [number, number] | null;
}

export function defaultViewState(): ViewState {
  return { runId: null, axes: null, sliders: {}, overlay: true, scale: null };
}

export function encodeViewState(state: ViewState): string {
  const params = new URLSearchParams();
  if (state.runId !== null) params.set("run", state.runId);
  if (state.axes !== null) params.set("axes", `${state.axes[0]},${state.axes[1]}`);
  const names = Object.keys(state.sliders).sort();
  if (names.length > 0) {
    params.set("fix", names.map((n) => `${n}:${state.sliders[n]}`).join(","));
  }
  params.set("overlay", state.overlay ? "1" : "0");
  if (state.scale !== null) params.set("scale", `${state.scale[0]}:${state.scale[1]}`);
  return params.toString();
}

/** Inverse of encodeViewState. Malformed pieces fall back to defaults. */
export function decodeViewState(query: string): ViewState {
  const params = new URLSearchParams(query);
  const state = defaultViewState();

  const run = params.get("run");
  if (run) state.runId = run;

  const axes = params.get("axes");
  if (axes) {
    const parts = axes.split(",").map((s) => s.trim()).filter((s) => s.length > 0);
    if (parts.length === 2 && parts[0] !== parts[1]) {
      state.axes = [parts[0], parts[1]];
    }
  }

  const fix = params.get("fix");
  if (fix) {
    for (const item of fix.split(",")) {
      const [name, idxStr] = item.split(":");
      if (!name || idxStr === undefined) continue;
      const idx = Number(idxStr);
      if (Number.isInteger(idx) && idx >= 0) state.sliders[name] = idx;
    }
  }

  if (params.get("overlay") === "0") state.overlay = false;

  const scale = params.get("scale");
  if (scale) {
    const [loStr, hiStr] = scale.split(":");
    const lo = Number(loStr);
    const hi = Number(hiStr);
    if (Number.isFinite(lo) && Number.isFinite(hi) && lo < hi) state.scale = [lo, hi];
  }

  return state;
}

export interface GridShape {
  names: string[];
  counts: number[];
}

/**
 * Clamp a view state onto a concrete grid: axes must be two distinct grid
 * axis names (else the first two), every non-free axis gets an in-range
 * slider index, and stale slider entries are dropped.
 */
export function validateViewState(state: ViewState, shape: GridShape): ViewState {
  const names = shape.names;
  let axes = state.axes;
  if (
    axes === null ||
    axes[0] === axes[1] ||
    !names.includes(axes[0]) ||
    !names.includes(axes[1])
  ) {
    if (names.length < 2) throw new Error(`grid has only ${names.length} axes; need two`);
    axes = [names[0], names[1]];
  }

  const sliders: Record<string, number> = {};
  for (let a = 0; a < names.length; a++) {
    const name = names[a];
    if (name === axes[0] || name === axes[1]) continue;
    const count = shape.counts[a];
    const raw = state.sliders[name] ?? 0;
    sliders[name] = Math.min(Math.max(raw, 0), count - 1);
  }

  return { ...state, axes, sliders };
}

/** Grid-plane value for slider index i, matching the service's own grid. */
export function planeValue(axis: AxisSpec, i: number): number {
  return axis.lo + i * axis.spacing;
}
