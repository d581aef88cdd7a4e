/**
 * The viewer's behaviour, free of any DOM: a SliceViewer owns the view
 * state, talks to the service through an Api, and pushes everything
 * displayable into a ViewerView. The browser binding in dom.ts implements
 * ViewerView with real elements; tests implement it with a recorder.
 *
 * Request discipline: at most one slice request is in flight; a newer view
 * state aborts the older request. A failed slice fetch leaves the last good
 * rendering in place and surfaces the reason as a message.
 */

import { Api, ApiError } from "./api.js";
import { buildHeatmap, type HeatmapModel } from "./heatmap.js";
import {
  defaultViewState,
  encodeViewState,
  planeValue,
  validateViewState,
  type ViewState,
} from "./state.js";
import {
  deriveFollowupConfig,
  pollRunStatus,
  type BoxSelection,
  type FollowupOptions,
  type PollOptions,
} from "./followup.js";
import type { AxisSpec, RunDetail, RunSummary, SlicePayload } from "./types.js";

export interface SliderInfo {
  axis: string;
  index: number;
  count: number;
  /** grid-plane parameter value at the current index */
  value: number;
}

export interface ViewerView {
  showRuns(runs: RunSummary[], selected: string | null): void;
  showAxes(names: string[], axes: [string, string]): void;
  showSliders(sliders: SliderInfo[]): void;
  showSlice(model: HeatmapModel): void;
  showMessage(message: string | null): void;
  showUrl(query: string): void;
}

function isAbort(err: unknown): boolean {
  return err instanceof Error && err.name === "AbortError";
}

export class SliceViewer {
  readonly api: Api;
  readonly view: ViewerView;
  state: ViewState;

  runs: RunSummary[] = [];
  detail: RunDetail | null = null;
  /** per-axis node counts of the selected run, as the service reports them */
  counts: number[] = [];
  lastSlice: SlicePayload | null = null;
  lastModel: HeatmapModel | null = null;

  private inflight: AbortController | null = null;

  constructor(api: Api, view: ViewerView, initial?: ViewState) {
    this.api = api;
    this.view = view;
    this.state = initial ?? defaultViewState();
  }

  /** Load the run list and bring up the initial (or URL-restored) run. */
  async start(): Promise<void> {
    this.runs = await this.api.listRuns();
    let target = this.state.runId;
    if (target === null || !this.runs.some((r) => r.id === target)) {
      const done = this.runs.find((r) => r.status === "done");
      target = done ? done.id : this.runs.length > 0 ? this.runs[0].id : null;
    }
    this.view.showRuns(this.runs, target);
    if (target !== null) {
      await this.selectRun(target);
    }
  }

  async selectRun(id: string): Promise<void> {
    try {
      this.detail = await this.api.getRun(id);
    } catch (err) {
      this.fail(err);
      return;
    }
    this.state.runId = id;
    const axes = this.detail.config.axes;
    const summary = this.runs.find((r) => r.id === id);
    this.counts =
      summary !== undefined && summary.grid_counts.length === axes.length
        ? summary.grid_counts
        : axes.map(axisCount);
    this.state = validateViewState(this.state, this.shape());
    this.view.showRuns(this.runs, id);
    this.view.showAxes(axes.map((a) => a.name), this.state.axes as [string, string]);
    this.pushSliders();
    await this.refresh();
  }

  async setAxes(a: string, b: string): Promise<void> {
    if (this.detail === null) return;
    this.state.axes = [a, b];
    this.state = validateViewState(this.state, this.shape());
    this.view.showAxes(this.detail.config.axes.map((x) => x.name), this.state.axes as [string, string]);
    this.pushSliders();
    await this.refresh();
  }

  async moveSlider(axis: string, index: number): Promise<void> {
    if (this.detail === null || !(axis in this.state.sliders)) return;
    const count = this.countOf(axis);
    this.state.sliders[axis] = Math.min(Math.max(index, 0), count - 1);
    this.pushSliders();
    await this.refresh();
  }

  /** Marker overlay on/off; re-renders from the kept slice, no request. */
  toggleOverlay(): void {
    this.state.overlay = !this.state.overlay;
    this.rerender();
  }

  setScale(scale: [number, number] | null): void {
    this.state.scale = scale;
    this.rerender();
  }

  /** Fetch the slice for the current state, superseding any older request. */
  async refresh(): Promise<void> {
    if (this.detail === null || this.state.axes === null) return;
    const fix: Record<string, number> = {};
    for (const axis of this.detail.config.axes) {
      const idx = this.state.sliders[axis.name];
      if (idx !== undefined) fix[axis.name] = planeValue(axis, idx);
    }
    this.inflight?.abort();
    const controller = new AbortController();
    this.inflight = controller;
    let slice: SlicePayload;
    try {
      slice = await this.api.getSlice(
        this.detail.id,
        this.state.axes,
        fix,
        controller.signal,
      );
    } catch (err) {
      if (isAbort(err)) return;
      this.fail(err);
      return;
    }
    if (this.inflight !== controller) return; // superseded while decoding
    this.inflight = null;
    this.lastSlice = slice;
    this.view.showMessage(null);
    this.rerender();
  }

  /**
   * Launch a run restricted to a sub-box of the current run, wait for it to
   * finish, refresh the run list and switch to it. Returns the new id.
   */
  async launchFollowup(
    selection: BoxSelection,
    opts: FollowupOptions,
    poll?: PollOptions,
  ): Promise<string> {
    if (this.detail === null) throw new Error("no run selected");
    const config = deriveFollowupConfig(this.detail.config, selection, opts);
    const reply = await this.api.launchRun(config);
    this.view.showMessage(`run ${reply.id}: ${reply.status}`);
    try {
      await pollRunStatus(this.api, reply.id, poll);
    } catch (err) {
      this.fail(err);
      throw err;
    }
    this.runs = await this.api.listRuns();
    this.view.showRuns(this.runs, reply.id);
    await this.selectRun(reply.id);
    return reply.id;
  }

  private rerender(): void {
    if (this.lastSlice === null) return;
    const scale = this.state.scale;
    this.lastModel = buildHeatmap(this.lastSlice, {
      overlay: this.state.overlay,
      scale: scale === null ? null : { lo: scale[0], hi: scale[1] },
    });
    this.view.showSlice(this.lastModel);
    this.view.showUrl(encodeViewState(this.state));
  }

  private pushSliders(): void {
    if (this.detail === null) return;
    const sliders: SliderInfo[] = [];
    this.detail.config.axes.forEach((axis, a) => {
      const idx = this.state.sliders[axis.name];
      if (idx === undefined) return;
      sliders.push({
        axis: axis.name,
        index: idx,
        count: this.counts[a],
        value: planeValue(axis, idx),
      });
    });
    this.view.showSliders(sliders);
  }

  private fail(err: unknown): void {
    const text =
      err instanceof ApiError ? err.detail : err instanceof Error ? err.message : String(err);
    this.view.showMessage(text);
  }

  private shape() {
    const axes = this.detail!.config.axes;
    return { names: axes.map((a) => a.name), counts: this.counts };
  }

  private countOf(name: string): number {
    const a = this.detail!.config.axes.findIndex((x) => x.name === name);
    return this.counts[a];
  }
}

/**
 * Node count along one axis, mirroring how the service lays out its grid
 * (floor with a small slack, so exact multiples of the spacing survive
 * rounding). Fallback for runs whose summary is not at hand.
 */
export function axisCount(axis: AxisSpec): number {
  return Math.floor((axis.hi - axis.lo) / axis.spacing + 1e-9) + 1;
}
