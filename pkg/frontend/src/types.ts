/** Wire schema of the analysis server (snake_case, full snapshots). */

export interface Fit {
  slope: number | null;
  intercept: number | null;
  stderr: number | null;
  t: number | null;
  p: number | null;
  n: number;
  defined: boolean;
}

export interface Cluster {
  id: number;
  name: string;
  color: string; // 6 hex digits, no '#'
  size: number;
  coords_idx: number[]; // indices into points
  fit: Fit;
  selected: boolean;
}

export interface Point {
  row_id: number;
  x: number;
  y: number;
  t_value: number;
  o_value: number;
}

export interface Contribution {
  cluster: number;
  n: number;
  b: number;
}

export interface Ate {
  value: number | null;
  n_total: number;
  defined: boolean;
  contributions: Contribution[];
}

export interface Simpson {
  overall_slope: number | null;
  flagged: number[];
}

export type CovariateSummary = {
  min: number;
  q1: number;
  median: number;
  q3: number;
  max: number;
  mean: number;
  hist: number[];
} | null;

export interface Snapshot {
  version: number;
  treatment: string;
  outcome: string;
  k: number;
  seed: number;
  method: string;
  excluded_ids: number[];
  clusters: Cluster[];
  points: Point[];
  overall_fit: Fit;
  ate: Ate;
  simpson: Simpson;
  covariate_display: string[];
  covariate_summaries: Record<string, CovariateSummary[]>;
}

export interface ActionRequest {
  action: string;
  payload: Record<string, unknown>;
  expect_version?: number;
}

export interface ActionResponse {
  version: number;
  snapshot: Snapshot;
  warnings: string[];
}

export interface SessionCreated {
  id: string;
  snapshot: Snapshot;
}
