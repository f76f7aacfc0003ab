/**
 * Scenario import/export. Files are the same YAML documents the CLI
 * reads (JSON bodies are valid YAML), so anything explored in the UI can
 * be saved and rerun headlessly, and vice versa.
 */
import YAML from "yaml";

import {
  checkScenario,
  type InvalidOutcome,
  type ScenarioDocument,
  type ValidOutcome,
} from "./schema";

export function parseScenarioText(text: string): ValidOutcome | InvalidOutcome {
  let raw: unknown;
  try {
    raw = YAML.parse(text);
  } catch (err) {
    if (err instanceof YAML.YAMLParseError && err.linePos?.[0]) {
      const { line, col } = err.linePos[0];
      return { ok: false, errors: [`parse error at line ${line}, column ${col}`] };
    }
    return { ok: false, errors: [`parse error: ${String(err)}`] };
  }
  if (raw === null || typeof raw !== "object" || Array.isArray(raw)) {
    return { ok: false, errors: ["scenario must be a mapping of sections"] };
  }
  return checkScenario(raw);
}

export function toYamlText(doc: ScenarioDocument): string {
  return YAML.stringify(doc);
}

export function toJsonText(doc: ScenarioDocument): string {
  return `${JSON.stringify(doc, null, 2)}\n`;
}
