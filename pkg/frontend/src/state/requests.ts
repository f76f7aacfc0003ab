/**
 * Builders for the request bodies the panels send. A scenario document IS
 * a request body, so the sizing readout for a loaded file is produced by
 * POSTing that file verbatim: the end-to-end tests replay these exact
 * bodies through the CLI to prove the two agree.
 */
import type { ScenarioDocument } from "../scenario/schema";

export type RangeSpec = string | number[];

/** The sizing request for a document is the document, untouched. */
export function samplesizeBody(doc: ScenarioDocument): ScenarioDocument {
  return doc;
}

/** Multi-prior comparison likewise posts the document as-is. */
export function comparePriorsBody(doc: ScenarioDocument): ScenarioDocument {
  return doc;
}

/** Density panels ask for the prior draws behind the document. */
export function priorSampleBody(doc: ScenarioDocument): ScenarioDocument {
  return doc;
}

function clone(doc: ScenarioDocument): ScenarioDocument {
  return structuredClone(doc);
}

export function curveBody(
  doc: ScenarioDocument,
  nBar: RangeSpec,
  mode?: "power" | "assurance",
): ScenarioDocument {
  const body = clone(doc);
  body.search = { ...(body.search ?? {}) };
  body.search.ranges = { ...(body.search.ranges ?? {}), n_bar: nBar };
  if (mode !== undefined) {
    body.search.mode = mode;
  }
  return body;
}

export function nuSweepBody(
  doc: ScenarioDocument,
  nu: RangeSpec,
  nBar: RangeSpec,
): ScenarioDocument {
  const body = clone(doc);
  body.search = { ...(body.search ?? {}) };
  body.search.ranges = { nu, n_bar: nBar };
  return body;
}

/** Reduce a multi-prior document to one labelled prior (for densities). */
export function singlePriorBody(doc: ScenarioDocument, index: number): ScenarioDocument {
  const body = clone(doc);
  const chosen = body.priors?.[index];
  if (chosen === undefined) return body;
  const { label: _label, ...prior } = chosen;
  delete body.priors;
  body.prior = prior;
  return body;
}

/** Stepper edits: new document with design fields patched in place. */
export function withDesign(
  doc: ScenarioDocument,
  patch: Partial<NonNullable<ScenarioDocument["design"]>>,
): ScenarioDocument {
  const body = clone(doc);
  body.design = { ...body.design, ...patch };
  return body;
}

export function withSearch(
  doc: ScenarioDocument,
  patch: Partial<NonNullable<ScenarioDocument["search"]>>,
): ScenarioDocument {
  const body = clone(doc);
  body.search = { ...(body.search ?? {}), ...patch };
  return body;
}

/** n_bar grid for the trade-off chart: the file's own grid when it has
 * one, otherwise an even ladder wide enough to show the readout. */
export function chartRange(doc: ScenarioDocument, foundNBar: number | null): RangeSpec {
  const own = doc.search?.ranges?.n_bar;
  if (own !== undefined) return own;
  const hi = Math.max(40, foundNBar === null ? 0 : Math.ceil(foundNBar * 1.6));
  return `2:${hi}:2`;
}
