/**
 * Design explorer: steppers for the cluster count, target, alpha and
 * sidedness drive debounced sizing and curve requests; the readout card
 * shows the minimal design and every displayed number carries its request
 * digest and seed on hover so it can be reproduced verbatim.
 */
import { type Api, ApiError } from "../api/client";
import { requestKey } from "../api/canonical";
import type {
  ComparisonResult,
  CurveResult,
  Envelope,
  SampleSizeResult,
  SweepResult,
} from "../api/types";
import { curveChart, type CurveSeries } from "../charts/render";
import { debounce } from "../lib/debounce";
import { clear, h } from "../lib/dom";
import { RequestGate } from "../lib/gate";
import { checkScenario, type ScenarioDocument } from "../scenario/schema";
import type { AppState, PinnedReadout } from "../state/appState";
import {
  chartRange,
  comparePriorsBody,
  curveBody,
  nuSweepBody,
  samplesizeBody,
} from "../state/requests";
import type { Store } from "../state/store";

const CURVE_COLORS = ["#7358c5", "#c25b31", "#2277aa", "#3a9b6e", "#a8338d", "#888833"];

export class ExplorerPanel {
  readonly root: HTMLElement;
  private readonly controls: HTMLElement;
  private readonly banner: HTMLElement;
  private readonly readout: HTMLElement;
  private readonly chartBox: HTMLElement;
  private readonly tableBox: HTMLElement;
  private readonly pinnedBox: HTMLElement;
  private readonly sizeGate = new RequestGate();
  private readonly curveGate = new RequestGate();
  private readonly refresh = debounce((doc: ScenarioDocument, sweep: boolean) => {
    void this.load(doc, sweep);
  }, 300);
  private lastOwnDoc: ScenarioDocument | null = null;
  private lastSweep = false;
  private lastSize: Envelope<SampleSizeResult> | null = null;

  constructor(
    private readonly client: Api,
    private readonly store: Store<AppState>,
  ) {
    this.controls = h("div", { class: "explorer-controls" });
    this.banner = h("div", { class: "banner", hidden: true, role: "status" });
    this.readout = h("div", { class: "readout" });
    this.chartBox = h("div", { class: "chart-box" });
    this.tableBox = h("div", { class: "table-box" });
    this.pinnedBox = h("div", { class: "pinned" });
    this.root = h(
      "section",
      { class: "panel explorer-panel" },
      h("h2", {}, "Design explorer"),
      this.controls,
      this.banner,
      this.readout,
      this.chartBox,
      this.tableBox,
      this.pinnedBox,
    );
    store.subscribe((state) => this.onState(state));
  }

  private onState(state: AppState): void {
    if (state.doc === null) return;
    if (state.doc !== this.lastOwnDoc || state.sweep !== this.lastSweep) {
      this.renderControls(state);
    }
    this.renderPinned(state.pinned);
    this.refresh(state.doc, state.sweep);
  }

  private edit(mutate: (doc: ScenarioDocument) => void): void {
    const current = this.store.get().doc;
    if (current === null) return;
    const draft = structuredClone(current);
    mutate(draft);
    const outcome = checkScenario(draft);
    if (!outcome.ok) {
      this.banner.hidden = false;
      this.banner.textContent = outcome.errors.join("\n");
      return;
    }
    this.banner.hidden = true;
    this.lastOwnDoc = outcome.doc;
    this.store.update((s) => ({ ...s, doc: outcome.doc, errors: [] }));
  }

  private renderControls(state: AppState): void {
    const doc = state.doc!;
    clear(this.controls);
    this.lastSweep = state.sweep;

    const clusters = h("input", {
      type: "number",
      min: "2",
      step: "2",
      value: String(doc.design.clusters ?? ""),
      "data-control": "clusters",
    });
    clusters.addEventListener("input", () => {
      const v = Number(clusters.value);
      if (!Number.isFinite(v)) return;
      this.edit((d) => {
        d.design.clusters = v;
      });
    });

    const target = h("input", {
      type: "number",
      min: "0.05",
      max: "0.99",
      step: "0.01",
      value: String(doc.search?.target ?? 0.8),
      "data-control": "target",
    });
    target.addEventListener("input", () => {
      const v = Number(target.value);
      if (!Number.isFinite(v)) return;
      this.edit((d) => {
        d.search = { ...(d.search ?? {}), target: v };
      });
    });

    const alpha = h("select", { "data-control": "alpha" });
    for (const a of [0.01, 0.025, 0.05, 0.1]) {
      const option = h("option", { value: String(a) }, String(a));
      if (a === (doc.design.alpha ?? 0.05)) option.setAttribute("selected", "");
      alpha.appendChild(option);
    }
    alpha.addEventListener("change", () => {
      this.edit((d) => {
        d.design.alpha = Number(alpha.value);
      });
    });

    const sided = h("select", { "data-control": "sidedness" });
    for (const s of ["two-sided", "one-sided"]) {
      const option = h("option", { value: s }, s);
      if (s === (doc.design.sidedness ?? "two-sided")) option.setAttribute("selected", "");
      sided.appendChild(option);
    }
    sided.addEventListener("change", () => {
      this.edit((d) => {
        d.design.sidedness = sided.value as "two-sided" | "one-sided";
      });
    });

    const sweep = h("input", { type: "checkbox", "data-control": "sweep" }) as HTMLInputElement;
    sweep.checked = state.sweep;
    sweep.addEventListener("change", () => {
      this.store.update((s) => ({ ...s, sweep: sweep.checked }));
    });

    const pin = h("button", { type: "button", "data-control": "pin" }, "pin readout");
    pin.addEventListener("click", () => this.pinCurrent());

    this.controls.append(
      labelled("clusters C", clusters),
      labelled("target", target),
      labelled("α", alpha),
      labelled("test", sided),
      labelled("ν sweep", sweep),
      pin,
    );
  }

  private async load(doc: ScenarioDocument, sweep: boolean): Promise<void> {
    if (doc.priors !== undefined) {
      this.tableBox.hidden = false;
      this.chartBox.hidden = true;
      await this.loadComparison(doc);
      return;
    }
    this.tableBox.hidden = true;
    this.chartBox.hidden = false;
    await Promise.all([this.loadSize(doc), sweep ? this.loadSweep(doc) : this.loadCurves(doc)]);
  }

  private async loadSize(doc: ScenarioDocument): Promise<void> {
    const body = samplesizeBody(doc);
    const key = await requestKey(body);
    try {
      const envelope = await this.sizeGate.run(key, (signal) =>
        this.client.post<SampleSizeResult>("samplesize", body, signal),
      );
      if (envelope === null) return;
      this.lastSize = envelope;
      this.banner.hidden = true;
      this.renderReadout(envelope);
    } catch (err) {
      if (err instanceof ApiError && err.infeasible) {
        this.lastSize = null;
        this.showInfeasible(err.infeasible.plateau, err.infeasible.target);
        return;
      }
      this.banner.hidden = false;
      this.banner.textContent = err instanceof ApiError ? err.messages.join("\n") : String(err);
    }
  }

  private showInfeasible(plateau: number, target: number): void {
    this.banner.hidden = false;
    this.banner.className = "banner infeasible";
    this.banner.textContent =
      `target ${target} is out of reach at this cluster count: even unlimited ` +
      `cluster sizes plateau at ${plateau.toFixed(4)}. Increase clusters.`;
    clear(this.readout);
    this.readout.append(h("p", { class: "readout-main" }, "no feasible cluster size"));
  }

  private renderReadout(envelope: Envelope<SampleSizeResult>): void {
    const r = envelope.result;
    clear(this.readout);
    this.banner.className = "banner";
    const trace = `request ${envelope.request_digest}\nseed ${envelope.seed}  S ${envelope.s}`;
    const card = h(
      "div",
      { class: "readout-card", title: trace },
      h("p", { class: "readout-main" }, `n̄ = ${r.n_bar}`, h("span", { class: "dim" }, `  N = ${r.n_total}`)),
      h(
        "p",
        { class: "readout-sub" },
        `${r.method} ${r.achieved?.toFixed(4) ?? "-"}` +
          (r.mc_stderr > 0 ? ` ± ${r.mc_stderr.toFixed(4)}` : "") +
          ` at target ${r.target}, C = ${r.c_total}`,
      ),
      h(
        "p",
        { class: "readout-sub dim" },
        `plateau ${r.plateau.toFixed(4)} · seed ${envelope.seed} · S ${envelope.s}`,
      ),
    );
    card.dataset.digest = envelope.request_digest;
    card.dataset.seed = String(envelope.seed);
    card.dataset.nBar = String(r.n_bar);
    this.readout.append(card);
  }

  private async loadCurves(doc: ScenarioDocument): Promise<void> {
    const range = chartRange(doc, this.lastSize?.result.n_bar ?? null);
    const assuranceBody = curveBody(doc, range);
    const powerBody = curveBody(doc, range, "power");
    const key = await requestKey({ assurance: assuranceBody, power: powerBody });
    try {
      const pair = await this.curveGate.run(key, (signal) =>
        Promise.all([
          this.client.post<CurveResult>("curve", assuranceBody, signal),
          this.client.post<CurveResult>("curve", powerBody, signal),
        ]),
      );
      if (pair === null) return;
      this.renderCurves(doc, pair[0], pair[1]);
    } catch (err) {
      if (!(err instanceof ApiError)) throw err;
      this.banner.hidden = false;
      this.banner.textContent = err.messages.join("\n");
    }
  }

  private renderCurves(
    doc: ScenarioDocument,
    first: Envelope<CurveResult>,
    second: Envelope<CurveResult>,
  ): void {
    clear(this.chartBox);
    const series: CurveSeries[] = [first, second].map((envelope, i) => ({
      label: envelope.result.method,
      color: CURVE_COLORS[i]!,
      xs: envelope.result.points.map((p) => p.n_bar),
      ys: envelope.result.points.map((p) => p.value),
      dashed: envelope.result.method === "power",
    }));
    const marker =
      this.lastSize !== null &&
      this.lastSize.result.n_bar !== null &&
      this.lastSize.result.achieved !== null
        ? { x: this.lastSize.result.n_bar, y: this.lastSize.result.achieved }
        : undefined;
    const chart = curveChart({
      series,
      target: doc.search?.target ?? 0.8,
      marker,
      xLabel: "mean cluster size n̄",
      yLabel: "probability",
    });
    const box = h("div", {
      title: `requests ${first.request_digest.slice(0, 12)}…, ${second.request_digest.slice(0, 12)}…\nseed ${first.seed}`,
    });
    box.appendChild(chart);
    this.chartBox.append(box);
  }

  private async loadSweep(doc: ScenarioDocument): Promise<void> {
    const body = nuSweepBody(doc, "0:1:0.25", chartRange(doc, this.lastSize?.result.n_bar ?? null));
    const key = await requestKey(body);
    try {
      const envelope = await this.curveGate.run(key, (signal) =>
        this.client.post<SweepResult>("nu-sweep", body, signal),
      );
      if (envelope === null) return;
      clear(this.chartBox);
      const series: CurveSeries[] = envelope.result.curves.map((curve, i) => ({
        label: `ν = ${curve.nu}`,
        color: CURVE_COLORS[i % CURVE_COLORS.length]!,
        xs: curve.points.map((p) => p.n_bar),
        ys: curve.points.map((p) => p.value),
      }));
      const chart = curveChart({
        series,
        target: doc.search?.target ?? 0.8,
        xLabel: "mean cluster size n̄",
        yLabel: "power",
      });
      const box = h("div", {
        title: `request ${envelope.request_digest}\nseed ${envelope.seed}`,
      });
      box.appendChild(chart);
      this.chartBox.append(box);
    } catch (err) {
      if (!(err instanceof ApiError)) throw err;
      this.banner.hidden = false;
      this.banner.textContent = err.messages.join("\n");
    }
  }

  private async loadComparison(doc: ScenarioDocument): Promise<void> {
    const body = comparePriorsBody(doc);
    const key = await requestKey(body);
    try {
      const envelope = await this.sizeGate.run(key, (signal) =>
        this.client.post<ComparisonResult>("compare-priors", body, signal),
      );
      if (envelope === null) return;
      this.banner.hidden = true;
      this.renderComparison(envelope);
    } catch (err) {
      if (!(err instanceof ApiError)) throw err;
      this.banner.hidden = false;
      this.banner.textContent = err.messages.join("\n");
    }
  }

  private renderComparison(envelope: Envelope<ComparisonResult>): void {
    clear(this.readout);
    clear(this.tableBox);
    const table = h("table", { class: "comparison" });
    table.appendChild(
      h(
        "tr",
        {},
        ...["prior", "method", "target", "C", "n̄", "N", "achieved"].map((c) => h("th", {}, c)),
      ),
    );
    for (const row of envelope.result.rows) {
      table.appendChild(
        h(
          "tr",
          {},
          h("td", {}, row.scenario_label),
          h("td", {}, row.method),
          h("td", {}, String(row.target)),
          h("td", {}, String(row.c_total)),
          h("td", {}, row.n_bar === null ? "—" : String(row.n_bar)),
          h("td", {}, row.n_total === null ? "—" : String(row.n_total)),
          h("td", {}, row.achieved === null ? "—" : row.achieved.toFixed(4)),
        ),
      );
    }
    const box = h("div", {
      title: `request ${envelope.request_digest}\nseed ${envelope.seed}  S ${envelope.s}`,
    });
    box.appendChild(table);
    this.tableBox.append(box);
  }

  private pinCurrent(): void {
    if (this.lastSize === null) return;
    const state = this.store.get();
    const r = this.lastSize.result;
    const pin: PinnedReadout = {
      label: `${state.sourceName || "scenario"} C=${r.c_total} target=${r.target}`,
      method: r.method,
      target: r.target,
      clusters: r.c_total,
      nBar: r.n_bar,
      nTotal: r.n_total,
      achieved: r.achieved,
      feasible: r.feasible,
      plateau: r.plateau,
      digest: this.lastSize.request_digest,
      seed: this.lastSize.seed,
    };
    this.store.update((s) => ({ ...s, pinned: [...s.pinned, pin] }));
  }

  private renderPinned(pins: PinnedReadout[]): void {
    clear(this.pinnedBox);
    if (pins.length === 0) return;
    this.pinnedBox.append(h("h3", {}, "pinned"));
    pins.forEach((pin, i) => {
      const remove = h("button", { type: "button", class: "unpin" }, "×");
      remove.addEventListener("click", () => {
        this.store.update((s) => ({ ...s, pinned: s.pinned.filter((_, j) => j !== i) }));
      });
      this.pinnedBox.append(
        h(
          "div",
          { class: "pin-card", title: `request ${pin.digest}\nseed ${pin.seed}` },
          h("span", { class: "pin-label" }, pin.label),
          h(
            "span",
            {},
            pin.feasible
              ? ` n̄=${pin.nBar}  N=${pin.nTotal}  ${pin.method} ${pin.achieved?.toFixed(3)}`
              : ` infeasible (plateau ${pin.plateau.toFixed(3)})`,
          ),
          remove,
        ),
      );
    });
  }
}

function labelled(text: string, control: HTMLElement): HTMLElement {
  return h("label", { class: "field" }, h("span", {}, text), control);
}
