/** Wire types of the odescout HTTP API. The viewer displays these verbatim. */

export type Flag = "computed" | "copied" | "interpolated" | "missing" | "failed";

export interface AxisSpec {
  name: string;
  lo: number;
  hi: number;
  spacing: number;
}

export interface ExplorationSection {
  mode: string;
  tol: number;
  i_max: number | null;
  fraction: number | null;
  n_size: number;
  seed: number;
  g0: number[][] | null;
}

/**
 * A run config as echoed by GET /runs/{id} and accepted by POST /runs.
 * The solver, cycle and relevance sections are passed through untouched;
 * the viewer never needs to look inside them.
 */
export interface RunConfig {
  model: string;
  feature: string;
  axes: AxisSpec[];
  fixed: Record<string, number>;
  solver?: Record<string, unknown>;
  cycle?: Record<string, unknown>;
  relevance?: Record<string, unknown>;
  exploration: ExplorationSection;
}

export interface RunSummary {
  id: string;
  status: string;
  grid_counts: number[];
  axis_names: string[];
  tol: number | null;
}

export interface RunDetail {
  id: string;
  status: string;
  error: string | null;
  config: RunConfig;
  counters: Record<string, number> | null;
  meta: Record<string, unknown> | null;
}

export interface StatusPayload {
  status: string;
  error: string | null;
}

export interface SlicePayload {
  axes: string[];
  fixed: Record<string, number>;
  axis_values: number[][];
  values: (number | null)[][];
  flags: Flag[][];
}

export interface LaunchReply {
  id: string;
  status: string;
}
