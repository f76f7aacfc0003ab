import { Client } from "./api/client";
import { clear, h } from "./lib/dom";
import { parseScenarioText, toJsonText, toYamlText } from "./scenario/files";
import { initialState } from "./state/appState";
import { Store } from "./state/store";
import { ExplorerPanel } from "./panels/explorerPanel";
import { PriorPanel } from "./panels/priorPanel";

const DEFAULT_PRESET = "icons_assurance_rho_only";

function download(name: string, text: string, mime: string): void {
  const blob = new Blob([text], { type: mime });
  const link = h("a", { href: URL.createObjectURL(blob), download: name });
  link.click();
  URL.revokeObjectURL(link.href);
}

async function boot(): Promise<void> {
  const app = document.getElementById("app");
  if (app === null) return;
  const base = new URLSearchParams(window.location.search).get("api") ?? "";
  const client = new Client(base);
  const store = new Store(initialState());

  const presetSelect = h("select", { class: "preset-select" });
  const importInput = h("input", { type: "file", accept: ".scenario,.yaml,.yml,.json", hidden: true });
  const importButton = h("button", { type: "button" }, "import…");
  const exportYaml = h("button", { type: "button" }, "export yaml");
  const exportJson = h("button", { type: "button" }, "export json");
  const issues = h("div", { class: "issues", role: "alert" });

  importButton.addEventListener("click", () => importInput.click());
  importInput.addEventListener("change", () => {
    const file = importInput.files?.[0];
    if (file === undefined) return;
    void file.text().then((text) => {
      const outcome = parseScenarioText(text);
      if (!outcome.ok) {
        issues.textContent = outcome.errors.join("\n");
        return;
      }
      issues.textContent = "";
      store.update((s) => ({ ...s, sourceName: file.name, doc: outcome.doc, errors: [] }));
    });
  });
  exportYaml.addEventListener("click", () => {
    const doc = store.get().doc;
    if (doc !== null) download("scenario.yaml", toYamlText(doc), "application/yaml");
  });
  exportJson.addEventListener("click", () => {
    const doc = store.get().doc;
    if (doc !== null) download("scenario.json", toJsonText(doc), "application/json");
  });

  const header = h(
    "header",
    {},
    h("h1", {}, "cluster trial designer"),
    h("div", { class: "toolbar" },
      h("label", {}, "preset ", presetSelect),
      importButton,
      exportYaml,
      exportJson,
    ),
  );

  const prior = new PriorPanel(client, store);
  const explorer = new ExplorerPanel(client, store);
  clear(app);
  app.append(header, issues, h("main", {}, prior.root, explorer.root));

  const presets = await client.presets();
  for (const preset of presets) {
    presetSelect.appendChild(h("option", { value: preset.name }, preset.name));
  }
  const loadPreset = (name: string): void => {
    const preset = presets.find((p) => p.name === name);
    if (preset === undefined) return;
    const outcome = parseScenarioText(preset.text);
    if (!outcome.ok) {
      issues.textContent = outcome.errors.join("\n");
      return;
    }
    issues.textContent = "";
    store.update((s) => ({ ...s, sourceName: name, doc: outcome.doc, errors: [] }));
  };
  presetSelect.addEventListener("change", () => loadPreset(presetSelect.value));

  const initial = presets.some((p) => p.name === DEFAULT_PRESET)
    ? DEFAULT_PRESET
    : presets[0]?.name;
  if (initial !== undefined) {
    presetSelect.value = initial;
    loadPreset(initial);
  }
}

void boot();
