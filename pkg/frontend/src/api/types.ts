/** Response shapes of the JSON service; field names mirror the wire format. */

export interface Envelope<R> {
  operation: string;
  request_digest: string;
  spec_digest: string;
  seed: number;
  s: number;
  result: R;
}

export interface AssuranceResult {
  type: "assurance";
  value: number;
  mc_stderr: number;
  c_total: number;
  n_bar: number;
  s: number;
  seed: number;
  spec_digest: string;
}

export interface SampleSizeResult {
  type: "samplesize";
  method: "power" | "assurance";
  target: number;
  c_total: number;
  n_bar: number | null;
  n_total: number | null;
  achieved: number | null;
  mc_stderr: number;
  feasible: boolean;
  plateau: number;
  s: number;
  seed: number;
  spec_digest: string;
}

export interface CurvePoint {
  n_bar: number;
  value: number;
  mc_stderr: number;
}

export interface CurveResult {
  type: "curve";
  delta_m: number;
  c_total: number;
  alpha: number;
  sidedness: string;
  method: string;
  points: CurvePoint[];
  s: number;
  seed: number;
  spec_digest: string;
}

export interface SweepCurve {
  nu: number;
  points: CurvePoint[];
}

export interface SweepResult {
  type: "nu-sweep";
  delta_m: number;
  c_total: number;
  alpha: number;
  sidedness: string;
  curves: SweepCurve[];
  s: number;
  seed: number;
  spec_digest: string;
}

export interface SensitivityRow {
  scenario_label: string;
  method: "power" | "assurance";
  target: number;
  c_total: number;
  n_bar: number | null;
  n_total: number | null;
  achieved: number | null;
  mc_stderr: number;
  feasible: boolean;
}

export interface ComparisonResult {
  type: "compare-priors";
  delta_m: number;
  alpha: number;
  sidedness: string;
  targets: number[];
  c_values: number[];
  rows: SensitivityRow[];
  s: number;
  seed: number;
  spec_digest: string;
}

export interface PriorSampleResult {
  sigma: number[];
  rho: number[];
  nu: number[];
}

export interface PresetEntry {
  name: string;
  text: string;
  scenario: unknown;
}
