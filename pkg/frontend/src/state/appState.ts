import type { ScenarioDocument } from "../scenario/schema";

/** One frozen sizing readout kept for side-by-side comparison. */
export interface PinnedReadout {
  label: string;
  method: string;
  target: number;
  clusters: number;
  nBar: number | null;
  nTotal: number | null;
  achieved: number | null;
  feasible: boolean;
  plateau: number;
  digest: string;
  seed: number;
}

export interface AppState {
  sourceName: string;
  doc: ScenarioDocument | null;
  errors: string[];
  sweep: boolean;
  pinned: PinnedReadout[];
}

export function initialState(): AppState {
  return { sourceName: "", doc: null, errors: [], sweep: false, pinned: [] };
}
