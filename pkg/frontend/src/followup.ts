/** Deriving and launching follow-up runs on a sub-box of an existing run. */

import type { Api } from "./api.js";
import type { RunConfig, StatusPayload } from "./types.js";
import { planeValue } from "./state.js";

export class SelectionError extends Error {
  constructor(message: string) {
    super(message);
    this.name = "SelectionError";
  }
}

/** Inclusive grid-index range per axis name. Missing axes keep their full range. */
export type BoxSelection = Record<string, [number, number]>;

export interface FollowupOptions {
  seed: number;
  tol?: number;
  fraction?: number;
}

/**
 * Restrict a run config to a sub-box and re-seed it.
 *
 * The axis ranges shrink to the selected grid planes (same spacing, so the
 * new grid is a sub-lattice of the old one); a single-plane selection is
 * rejected because the result would not be a box. With no tol/fraction
 * override and a full-box selection the derived config differs from the
 * original only in the exploration seed.
 */
export function deriveFollowupConfig(
  base: RunConfig,
  selection: BoxSelection,
  opts: FollowupOptions,
): RunConfig {
  const config = structuredClone(base);
  for (const axis of config.axes) {
    const range = selection[axis.name];
    if (range === undefined) continue;
    let [a, b] = range;
    if (a > b) [a, b] = [b, a];
    if (!Number.isInteger(a) || !Number.isInteger(b) || a < 0) {
      throw new SelectionError(`selection on axis '${axis.name}' is not an index range`);
    }
    if (a === b) {
      throw new SelectionError(
        `selection on axis '${axis.name}' is a single grid plane; widen it or drop the axis`,
      );
    }
    const lo = planeValue(axis, a);
    const hi = planeValue(axis, b);
    axis.lo = lo;
    axis.hi = hi;
  }
  for (const name of Object.keys(selection)) {
    if (!config.axes.some((a) => a.name === name)) {
      throw new SelectionError(`selection names unknown axis '${name}'`);
    }
  }
  config.exploration.seed = opts.seed;
  if (opts.tol !== undefined) config.exploration.tol = opts.tol;
  if (opts.fraction !== undefined) {
    config.exploration.fraction = opts.fraction;
    config.exploration.i_max = null;
  }
  config.exploration.g0 = null;
  return config;
}

export interface PollOptions {
  intervalMs?: number;
  timeoutMs?: number;
  sleep?: (ms: number) => Promise<void>;
}

const realSleep = (ms: number) => new Promise<void>((r) => setTimeout(r, ms));

/** Poll a run's status until it is done. Throws on failed or timeout. */
export async function pollRunStatus(api: Api, id: string, opts: PollOptions = {}): Promise<StatusPayload> {
  const interval = opts.intervalMs ?? 500;
  const timeout = opts.timeoutMs ?? 300_000;
  const sleep = opts.sleep ?? realSleep;
  const deadline = Date.now() + timeout;
  for (;;) {
    const status = await api.getStatus(id);
    if (status.status === "done") return status;
    if (status.status === "failed") {
      throw new Error(`run ${id} failed: ${status.error ?? "unknown error"}`);
    }
    if (Date.now() >= deadline) {
      throw new Error(`run ${id} still ${status.status} after ${timeout} ms`);
    }
    await sleep(interval);
  }
}
