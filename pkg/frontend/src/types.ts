// Shapes shared with the scenario service's JSON API.

export type GapValue = string | [number, number];

export interface ScenarioRequest {
  effect_primary: number;
  effect_secondary: number;
  gap: GapValue;
  n_treated: number;
  phase_in: 'instantaneous' | 'linear_3yr';
  ordering: 'random' | 'primary_first';
  model_class: 'AR' | 'DID';
  specification: 'correct' | 'misspecified';
  n_reps: number;
  seed: number;
}

export interface JobProgress {
  completed: number;
  total: number;
  fraction: number;
}

export interface JobStatus {
  job_id: string;
  status: 'queued' | 'running' | 'done' | 'failed';
  progress: JobProgress;
}

export interface MetricSummaryPayload {
  n_reps: number;
  truth: number;
  bias: number;
  std_bias: number | null;
  rel_bias_pct: number | null;
  var_model: number;
  var_empirical: number;
  rmse: number;
  type1: number | null;
  typeS: number | null;
  coverage: number;
}

export interface PanelEntry {
  metric: string;
  policy: string;
  value: number;
}

export interface ResultPayload {
  scenario: Record<string, unknown>;
  summaries: Record<string, MetricSummaryPayload>;
  panels: PanelEntry[];
  n_reps: number;
  n_failed: number;
  fail_rate: number;
}

export interface Thresholds {
  ar_min_gap_years: [number, number];
  did_min_gap_years: [number, number];
  rel_bias_band_edges_pct: number[];
  std_bias_band_edges: number[];
}

export interface StoredResult {
  label: string;
  request: ScenarioRequest;
  payload: ResultPayload;
}
