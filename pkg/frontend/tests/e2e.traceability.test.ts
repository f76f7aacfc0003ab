/**
 * End-to-end traceability: the design-explorer readout for every bundled
 * preset must equal what the command line reports for the same file.
 *
 * The test boots the real service, replays the EXACT request bodies the UI
 * builds (parse preset text with the UI parser, pass it through the UI's
 * body builders, POST it), then runs the CLI on the same preset with
 * `--out` and deep-compares the result objects. It also checks that the
 * digest the UI computes locally matches the one the service echoes, and
 * that replaying a request is byte-identical.
 *
 * Requires the `crtassure` command on PATH (the Python package installed).
 */
import { execFile, spawn, type ChildProcessByStdio } from "node:child_process";
import { mkdtemp, readFile, rm } from "node:fs/promises";
import { createServer } from "node:net";
import { tmpdir } from "node:os";
import { join } from "node:path";
import type { Readable } from "node:stream";
import { promisify } from "node:util";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { requestKey } from "../src/api/canonical";
import { ApiError, Client } from "../src/api/client";
import type { ComparisonResult, PresetEntry, SampleSizeResult } from "../src/api/types";
import { parseScenarioText } from "../src/scenario/files";
import type { ScenarioDocument } from "../src/scenario/schema";
import { comparePriorsBody, samplesizeBody, withSearch } from "../src/state/requests";

const execFileAsync = promisify(execFile);

const SIZING_PRESETS = ["icons_power", "icons_assurance_rho_only", "icons_assurance_full_psi"];
const SENSITIVITY_PRESET = "icons_prior_sensitivity";

function freePort(): Promise<number> {
  return new Promise((resolve, reject) => {
    const probe = createServer();
    probe.once("error", reject);
    probe.listen(0, "127.0.0.1", () => {
      const address = probe.address();
      if (address === null || typeof address === "string") {
        probe.close();
        reject(new Error("could not determine a free port"));
        return;
      }
      const { port } = address;
      probe.close(() => resolve(port));
    });
  });
}

type ServerProcess = ChildProcessByStdio<null, Readable, Readable>;

async function waitForHealthy(base: string, child: ServerProcess): Promise<void> {
  const deadline = Date.now() + 60_000;
  let lastError: unknown = null;
  while (Date.now() < deadline) {
    if (child.exitCode !== null) {
      throw new Error(`service exited early with code ${child.exitCode}`);
    }
    try {
      const response = await fetch(`${base}/healthz`);
      if (response.ok) return;
    } catch (err) {
      lastError = err;
    }
    await new Promise((resolve) => setTimeout(resolve, 250));
  }
  throw new Error(`service never became healthy: ${String(lastError)}`);
}

function mustParse(text: string): ScenarioDocument {
  const outcome = parseScenarioText(text);
  if (!outcome.ok) {
    throw new Error(`preset text failed the UI's own validation: ${outcome.errors.join("; ")}`);
  }
  return outcome.doc;
}

let child: ServerProcess;
let base: string;
let client: Client;
let workDir: string;
let presets: PresetEntry[];
let serverLog = "";

beforeAll(async () => {
  const port = await freePort();
  base = `http://127.0.0.1:${port}`;
  child = spawn("crtassure", ["serve", "--host", "127.0.0.1", "--port", String(port)], {
    stdio: ["ignore", "pipe", "pipe"],
  });
  child.stdout.on("data", (chunk: Buffer) => {
    serverLog += chunk.toString();
  });
  child.stderr.on("data", (chunk: Buffer) => {
    serverLog += chunk.toString();
  });
  try {
    await waitForHealthy(base, child);
  } catch (err) {
    throw new Error(`${String(err)}\nserver output:\n${serverLog}`);
  }
  client = new Client(base);
  workDir = await mkdtemp(join(tmpdir(), "crtassure-e2e-"));
  presets = await client.presets();
}, 90_000);

afterAll(async () => {
  child?.kill("SIGTERM");
  await new Promise((resolve) => setTimeout(resolve, 200));
  if (child && child.exitCode === null) child.kill("SIGKILL");
  if (workDir) await rm(workDir, { recursive: true, force: true });
});

function presetNamed(name: string): PresetEntry {
  const preset = presets.find((p) => p.name === name);
  if (preset === undefined) {
    throw new Error(
      `preset ${name} not served; got ${presets.map((p) => p.name).join(", ")}\n${serverLog}`,
    );
  }
  return preset;
}

describe("design-explorer readout matches the CLI verbatim", () => {
  for (const name of SIZING_PRESETS) {
    it(
      `samplesize over ${name}: service result equals \`crtassure samplesize ${name}\``,
      async () => {
        const preset = presetNamed(name);
        const doc = mustParse(preset.text);
        const body = samplesizeBody(doc);
        const envelope = await client.post<SampleSizeResult>("samplesize", body);

        expect(envelope.operation).toBe("samplesize");
        expect(await requestKey(body)).toBe(envelope.request_digest);

        const outPath = join(workDir, `${name}.samplesize.json`);
        await execFileAsync("crtassure", ["samplesize", name, "--out", outPath]);
        const cli = JSON.parse(await readFile(outPath, "utf8")) as unknown;

        expect(envelope.result).toEqual(cli);
      },
      120_000,
    );
  }

  it(
    `compare-priors over ${SENSITIVITY_PRESET}: service rows equal the CLI's`,
    async () => {
      const preset = presetNamed(SENSITIVITY_PRESET);
      const doc = mustParse(preset.text);
      const body = comparePriorsBody(doc);
      const envelope = await client.post<ComparisonResult>("compare-priors", body);

      expect(envelope.operation).toBe("compare-priors");
      expect(await requestKey(body)).toBe(envelope.request_digest);

      const outPath = join(workDir, `${SENSITIVITY_PRESET}.compare.json`);
      await execFileAsync("crtassure", [
        "compare-priors",
        SENSITIVITY_PRESET,
        "--out",
        outPath,
      ]);
      const cli = JSON.parse(await readFile(outPath, "utf8")) as unknown;

      expect(envelope.result).toEqual(cli);
    },
    240_000,
  );
});

describe("reproducibility of the wire protocol", () => {
  it(
    "replaying a request returns byte-identical JSON",
    async () => {
      const doc = mustParse(presetNamed("icons_assurance_rho_only").text);
      const payload = JSON.stringify(samplesizeBody(doc));
      const send = () =>
        fetch(`${base}/api/samplesize`, {
          method: "POST",
          headers: { "content-type": "application/json" },
          body: payload,
        });

      const first = await send();
      const second = await send();
      expect(first.status).toBe(200);
      expect(second.status).toBe(200);
      expect(first.headers.get("x-compute-ms")).not.toBeNull();
      const [a, b] = await Promise.all([first.text(), second.text()]);
      expect(a).toBe(b);
    },
    120_000,
  );

  it(
    "an out-of-reach target is reported with the plateau, not a bogus design",
    async () => {
      const doc = mustParse(presetNamed("icons_assurance_rho_only").text);
      const body = withSearch(doc, { target: 0.99 });
      let caught: unknown = null;
      try {
        await client.post<SampleSizeResult>("samplesize", body);
      } catch (err) {
        caught = err;
      }
      expect(caught).toBeInstanceOf(ApiError);
      const apiError = caught as ApiError;
      expect(apiError.status).toBe(422);
      expect(apiError.infeasible).toBeDefined();
      expect(apiError.infeasible!.target).toBe(0.99);
      expect(apiError.infeasible!.plateau).toBeLessThan(0.99);
      expect(apiError.infeasible!.result.feasible).toBe(false);
      expect(apiError.infeasible!.result.n_bar).toBeNull();
    },
    120_000,
  );

  it("a field error from the service names the offending path", async () => {
    const doc = structuredClone(mustParse(presetNamed("icons_power").text));
    (doc.design as { delta_m: number }).delta_m = -1;
    let caught: unknown = null;
    try {
      await client.post<SampleSizeResult>("samplesize", doc);
    } catch (err) {
      caught = err;
    }
    expect(caught).toBeInstanceOf(ApiError);
    const apiError = caught as ApiError;
    expect(apiError.status).toBe(400);
    expect(apiError.fieldMessages().some((m) => m.startsWith("/design/delta_m"))).toBe(true);
  }, 60_000);
});
