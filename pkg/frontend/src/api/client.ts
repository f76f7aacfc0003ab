/**
 * The UI's only data source. Every number rendered anywhere originates
 * from one of these endpoints; nothing statistical is computed in the
 * browser.
 */
import type { ScenarioDocument } from "../scenario/schema";
import type { Envelope, PresetEntry, SampleSizeResult } from "./types";

export type Operation =
  | "power"
  | "assurance"
  | "samplesize"
  | "curve"
  | "nu-sweep"
  | "compare-priors"
  | "prior-sample";

/** 422 payload: the target is unreachable at this cluster count. */
export interface InfeasibleDetail {
  message: string;
  target: number;
  plateau: number;
  result: SampleSizeResult;
}

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly messages: string[],
    readonly infeasible?: InfeasibleDetail,
  ) {
    super(messages[0] ?? `request failed with status ${status}`);
    this.name = "ApiError";
  }

  /** Lines that name a scenario field, e.g. "/prior/rho/median: ...". */
  fieldMessages(): string[] {
    return this.messages.filter((m) => m.startsWith("/"));
  }
}

function detailMessages(detail: unknown): string[] {
  if (typeof detail === "string") return detail.split("\n");
  if (Array.isArray(detail)) return detail.map(String);
  return [JSON.stringify(detail)];
}

function isInfeasibleDetail(detail: unknown): detail is InfeasibleDetail {
  return (
    typeof detail === "object" &&
    detail !== null &&
    "plateau" in detail &&
    "result" in detail
  );
}

/** What the panels need from a transport; tests substitute stubs. */
export interface Api {
  presets(): Promise<PresetEntry[]>;
  post<R>(
    operation: Operation,
    body: ScenarioDocument,
    signal?: AbortSignal,
  ): Promise<Envelope<R>>;
}

export class Client implements Api {
  constructor(readonly baseUrl: string = "") {}

  async presets(): Promise<PresetEntry[]> {
    const response = await fetch(`${this.baseUrl}/api/presets`);
    if (!response.ok) {
      throw new ApiError(response.status, [`failed to list presets (${response.status})`]);
    }
    const payload = (await response.json()) as { presets: PresetEntry[] };
    return payload.presets;
  }

  async post<R>(
    operation: Operation,
    body: ScenarioDocument,
    signal?: AbortSignal,
  ): Promise<Envelope<R>> {
    const response = await fetch(`${this.baseUrl}/api/${operation}`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
      signal,
    });
    if (response.ok) {
      return (await response.json()) as Envelope<R>;
    }
    let detail: unknown;
    try {
      detail = ((await response.json()) as { detail?: unknown }).detail;
    } catch {
      detail = `request failed with status ${response.status}`;
    }
    if (response.status === 422 && isInfeasibleDetail(detail)) {
      throw new ApiError(response.status, [detail.message], detail);
    }
    throw new ApiError(response.status, detailMessages(detail));
  }
}
