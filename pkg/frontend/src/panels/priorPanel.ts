/**
 * Prior builder: edit the marginals and joint of the current scenario and
 * see the implied densities. Inputs are validated locally before anything
 * is sent; the density panels render draws fetched from the service, so
 * the plots show exactly the prior the engine will average over.
 */
import { type Api, ApiError } from "../api/client";
import { requestKey } from "../api/canonical";
import type { Envelope, PriorSampleResult } from "../api/types";
import { densityPanel, scatterPanel } from "../charts/render";
import { debounce } from "../lib/debounce";
import { clear, h } from "../lib/dom";
import { RequestGate } from "../lib/gate";
import { checkScenario, type ScenarioDocument } from "../scenario/schema";
import type { AppState } from "../state/appState";
import { priorSampleBody, singlePriorBody } from "../state/requests";
import type { Store } from "../state/store";

interface FieldSpec {
  path: string;
  label: string;
  value: unknown;
  step?: string;
  onInput: (doc: ScenarioDocument, raw: number) => void;
}

export class PriorPanel {
  readonly root: HTMLElement;
  private readonly form: HTMLElement;
  private readonly errorBox: HTMLElement;
  private readonly plots: HTMLElement;
  private readonly gate = new RequestGate();
  private readonly requestDraws = debounce((doc: ScenarioDocument) => {
    void this.fetchDraws(doc);
  }, 300);
  private lastOwnDoc: ScenarioDocument | null = null;
  private priorIndex = 0;

  constructor(
    private readonly client: Api,
    private readonly store: Store<AppState>,
  ) {
    this.form = h("div", { class: "prior-form" });
    this.errorBox = h("div", { class: "field-errors", role: "alert" });
    this.plots = h("div", { class: "density-grid" });
    this.root = h(
      "section",
      { class: "panel prior-panel" },
      h("h2", {}, "Prior"),
      this.form,
      this.errorBox,
      this.plots,
    );
    store.subscribe((state) => this.onState(state));
  }

  private onState(state: AppState): void {
    if (state.doc === null) {
      clear(this.form);
      clear(this.plots);
      return;
    }
    if (state.doc !== this.lastOwnDoc) {
      this.priorIndex = 0;
      this.renderForm(state.doc);
    }
    this.errorBox.textContent = "";
    this.requestDraws(state.doc);
  }

  /** Apply an edit: validate first, flag inline and stay silent if bad. */
  private edit(mutate: (doc: ScenarioDocument) => void): void {
    const current = this.store.get().doc;
    if (current === null) return;
    const draft = structuredClone(current);
    mutate(draft);
    const outcome = checkScenario(draft);
    this.clearFlags();
    if (!outcome.ok) {
      this.flagFields(outcome.errors);
      return;
    }
    this.lastOwnDoc = outcome.doc;
    this.store.update((s) => ({ ...s, doc: outcome.doc, errors: [] }));
  }

  private clearFlags(): void {
    this.errorBox.textContent = "";
    for (const input of this.form.querySelectorAll("input[aria-invalid]")) {
      input.removeAttribute("aria-invalid");
    }
  }

  private flagFields(errors: string[]): void {
    const lines: string[] = [];
    for (const message of errors) {
      const path = message.split(":")[0] ?? "";
      const input = this.form.querySelector<HTMLInputElement>(
        `[data-path="${path.replace(/^\//, "")}"]`,
      );
      if (input) input.setAttribute("aria-invalid", "true");
      lines.push(message);
    }
    this.errorBox.textContent = lines.join("\n");
  }

  numberField(spec: FieldSpec): HTMLElement {
    const input = h("input", {
      type: "number",
      step: spec.step ?? "any",
      value: spec.value === undefined ? "" : String(spec.value),
      "data-path": spec.path,
    });
    input.addEventListener("input", () => {
      const parsed = Number(input.value);
      if (input.value.trim() === "" || Number.isNaN(parsed)) {
        input.setAttribute("aria-invalid", "true");
        return;
      }
      this.edit((doc) => spec.onInput(doc, parsed));
    });
    return h("label", { class: "field" }, h("span", {}, spec.label), input);
  }

  private renderForm(doc: ScenarioDocument): void {
    clear(this.form);
    if (doc.priors !== undefined) {
      const picker = h("select", { class: "prior-picker" });
      doc.priors.forEach((p, i) => {
        const option = h("option", { value: String(i) }, p.label);
        if (i === this.priorIndex) option.setAttribute("selected", "");
        picker.appendChild(option);
      });
      picker.addEventListener("change", () => {
        this.priorIndex = Number(picker.value);
        this.requestDraws(doc);
      });
      this.form.append(
        h(
          "p",
          { class: "note" },
          `comparing ${doc.priors.length} labelled priors; densities show `,
        ),
        picker,
      );
      return;
    }
    const prior = doc.prior;
    if (prior === undefined) return;

    const rho = prior.rho;
    if (rho?.kind === "logit-normal" && rho.median !== undefined && rho.ci95 !== undefined) {
      this.form.append(
        h("h3", {}, "ICC ρ — logit-normal from quantiles"),
        this.numberField({
          path: "prior/rho/median",
          label: "median",
          value: rho.median,
          step: "0.001",
          onInput: (d, v) => {
            setMarginal(d, "rho", { ...rho, median: v });
          },
        }),
        this.numberField({
          path: "prior/rho/ci95/0",
          label: "95% lower",
          value: rho.ci95[0],
          step: "0.0001",
          onInput: (d, v) => {
            setMarginal(d, "rho", { ...rho, ci95: [v, rho.ci95![1]] });
          },
        }),
        this.numberField({
          path: "prior/rho/ci95/1",
          label: "95% upper",
          value: rho.ci95[1],
          step: "0.001",
          onInput: (d, v) => {
            setMarginal(d, "rho", { ...rho, ci95: [rho.ci95![0], v] });
          },
        }),
      );
    } else if (rho?.kind === "logit-normal") {
      this.form.append(
        h("h3", {}, "ICC ρ — logit-normal"),
        this.numberField({
          path: "prior/rho/mu",
          label: "logit mean",
          value: rho.mu,
          step: "0.01",
          onInput: (d, v) => {
            setMarginal(d, "rho", { ...rho, mu: v });
          },
        }),
        this.numberField({
          path: "prior/rho/sigma_logit",
          label: "logit sd",
          value: rho.sigma_logit,
          step: "0.01",
          onInput: (d, v) => {
            setMarginal(d, "rho", { ...rho, sigma_logit: v });
          },
        }),
      );
    } else if (rho?.kind === "point") {
      this.form.append(
        h("h3", {}, "ICC ρ — point"),
        this.numberField({
          path: "prior/rho/value",
          label: "value",
          value: rho.value,
          step: "0.001",
          onInput: (d, v) => {
            setMarginal(d, "rho", { kind: "point", value: v });
          },
        }),
      );
    } else if (rho !== undefined) {
      this.form.append(h("p", { class: "note" }, `ρ: ${rho.kind} prior (edit via file)`));
    }

    this.form.append(...marginalEditor(this, "sigma", "outcome sd σ", prior.sigma));
    this.form.append(...marginalEditor(this, "nu", "size CV ν", prior.nu));

    const jointKind = prior.joint?.kind ?? "independent";
    if (jointKind === "copula") {
      const gamma = prior.joint?.gamma_corr ?? 0;
      const slider = h("input", {
        type: "range",
        min: "-1",
        max: "1",
        step: "0.01",
        value: String(gamma),
        "data-path": "prior/joint/gamma_corr",
      });
      const readout = h("span", { class: "gamma-value" }, gamma.toFixed(2));
      slider.addEventListener("input", () => {
        readout.textContent = Number(slider.value).toFixed(2);
        this.edit((d) => {
          d.prior!.joint = { kind: "copula", gamma_corr: Number(slider.value) };
        });
      });
      this.form.append(
        h("h3", {}, "joint — Gaussian copula"),
        h("label", { class: "field" }, h("span", {}, "ρ–σ correlation γ"), slider, readout),
      );
    } else {
      this.form.append(h("p", { class: "note" }, `joint: ${jointKind}`));
    }
  }

  private async fetchDraws(doc: ScenarioDocument): Promise<void> {
    const body =
      doc.priors !== undefined ? singlePriorBody(doc, this.priorIndex) : priorSampleBody(doc);
    const key = await requestKey(body);
    try {
      const envelope = await this.gate.run(key, (signal) =>
        this.client.post<PriorSampleResult>("prior-sample", body, signal),
      );
      if (envelope !== null) this.renderDraws(envelope);
    } catch (err) {
      if (err instanceof ApiError) {
        this.flagFields(err.fieldMessages());
        return;
      }
      this.errorBox.textContent = String(err);
    }
  }

  private renderDraws(envelope: Envelope<PriorSampleResult>): void {
    clear(this.plots);
    const { sigma, rho, nu } = envelope.result;
    const trace = `request ${envelope.request_digest}\nseed ${envelope.seed}  S ${envelope.s}`;
    this.plots.title = trace;
    this.plots.dataset.digest = envelope.request_digest;
    this.plots.dataset.seed = String(envelope.seed);
    this.plots.append(
      wrap("ρ marginal", densityPanel({ samples: rho, color: "#7358c5", xLabel: "ρ" })),
      wrap("σ marginal", densityPanel({ samples: sigma, color: "#2277aa", xLabel: "σ" })),
      wrap("ν marginal", densityPanel({ samples: nu, color: "#3a9b6e", xLabel: "ν" })),
      wrap(
        "(ρ, σ) joint",
        scatterPanel({ xs: rho, ys: sigma, xLabel: "ρ", yLabel: "σ" }),
      ),
    );
  }
}

function wrap(caption: string, chart: SVGSVGElement): HTMLElement {
  const box = h("figure", { class: "density" }, chart);
  box.appendChild(h("figcaption", {}, caption));
  return box;
}

type MarginalValue = NonNullable<NonNullable<ScenarioDocument["prior"]>["rho"]>;

function setMarginal(
  doc: ScenarioDocument,
  which: "rho" | "sigma" | "nu",
  value: MarginalValue,
): void {
  if (doc.prior === undefined) return;
  doc.prior[which] = value;
}

function marginalEditor(
  panel: PriorPanel,
  which: "sigma" | "nu",
  heading: string,
  marginal: MarginalValue | undefined,
): HTMLElement[] {
  const field = (spec: FieldSpec): HTMLElement => panel.numberField(spec);
  if (marginal === undefined) return [];
  if (marginal.kind === "point") {
    return [
      h("h3", {}, `${heading} — point`),
      field({
        path: `prior/${which}/value`,
        label: "value",
        value: marginal.value,
        onInput: (d, v) => {
          setMarginal(d, which, { kind: "point", value: v });
        },
      }),
    ];
  }
  if (marginal.kind === "gamma" && marginal.mean !== undefined) {
    return [
      h("h3", {}, `${heading} — gamma by moments`),
      field({
        path: `prior/${which}/mean`,
        label: "mean",
        value: marginal.mean,
        onInput: (d, v) => {
          setMarginal(d, which, { ...marginal, mean: v });
        },
      }),
      field({
        path: `prior/${which}/var`,
        label: "variance",
        value: marginal.var,
        onInput: (d, v) => {
          setMarginal(d, which, { ...marginal, var: v });
        },
      }),
    ];
  }
  return [h("p", { class: "note" }, `${heading}: ${marginal.kind} prior (edit via file)`)];
}
