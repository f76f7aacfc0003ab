/**
 * Client-side mirror of the server's scenario document schema.
 *
 * Validation happens before any request leaves the browser, so typos and
 * out-of-support numbers are flagged inline instead of round-tripping for
 * a 400. The parsed document itself is kept as plain data (no defaults
 * injected): what the user loaded is exactly what gets POSTed, so a
 * request body can always be replayed against the CLI from the same file.
 */
import { z } from "zod";

const finite = z.number().finite();

function xorGamma(
  v: { shape?: number; rate?: number; mean?: number; var?: number },
  ctx: z.RefinementCtx,
): void {
  const direct = v.shape !== undefined || v.rate !== undefined;
  const moments = v.mean !== undefined || v.var !== undefined;
  if (direct === moments) {
    ctx.addIssue({ code: "custom", message: "give either shape+rate or mean+var" });
    return;
  }
  if (direct && (v.shape === undefined || v.rate === undefined)) {
    ctx.addIssue({ code: "custom", message: "shape and rate must be given together" });
  }
  if (moments && (v.mean === undefined || v.var === undefined)) {
    ctx.addIssue({ code: "custom", message: "mean and var must be given together" });
  }
}

const gammaParamsSchema = z
  .strictObject({
    shape: finite.positive().optional(),
    rate: finite.positive().optional(),
    mean: finite.positive().optional(),
    var: finite.positive().optional(),
  })
  .superRefine(xorGamma);

const pointMarginal = z.strictObject({
  kind: z.literal("point"),
  value: finite,
});

const gammaMarginal = z
  .strictObject({
    kind: z.literal("gamma"),
    shape: finite.positive().optional(),
    rate: finite.positive().optional(),
    mean: finite.positive().optional(),
    var: finite.positive().optional(),
  })
  .superRefine(xorGamma);

const logitNormalMarginal = z
  .strictObject({
    kind: z.literal("logit-normal"),
    mu: finite.optional(),
    sigma_logit: finite.positive().optional(),
    median: finite.gt(0).lt(1).optional(),
    ci95: z.tuple([finite.gt(0).lt(1), finite.gt(0).lt(1)]).optional(),
  })
  .superRefine((v, ctx) => {
    const direct = v.mu !== undefined || v.sigma_logit !== undefined;
    const fitted = v.median !== undefined || v.ci95 !== undefined;
    if (direct === fitted) {
      ctx.addIssue({ code: "custom", message: "give either mu+sigma_logit or median+ci95" });
      return;
    }
    if (direct && (v.mu === undefined || v.sigma_logit === undefined)) {
      ctx.addIssue({ code: "custom", message: "incomplete logit-normal parameterisation" });
    }
    if (fitted && (v.median === undefined || v.ci95 === undefined)) {
      ctx.addIssue({ code: "custom", message: "incomplete logit-normal parameterisation" });
    }
    if (v.ci95 !== undefined && v.median !== undefined) {
      const [lo, hi] = v.ci95;
      if (!(lo < v.median && v.median < hi)) {
        ctx.addIssue({ code: "custom", message: "ci95 must bracket the median" });
      }
    }
  });

const empiricalMarginal = z
  .strictObject({
    kind: z.literal("empirical"),
    samples: z.array(finite).min(1).optional(),
    file: z.string().min(1).optional(),
  })
  .superRefine((v, ctx) => {
    if ((v.samples === undefined) === (v.file === undefined)) {
      ctx.addIssue({ code: "custom", message: "give either samples or a file reference" });
    }
  });

export const marginalSchema = z.discriminatedUnion("kind", [
  pointMarginal,
  gammaMarginal,
  empiricalMarginal,
  logitNormalMarginal,
]);

const jointSchema = z
  .strictObject({
    kind: z.enum(["independent", "copula", "induced"]).optional(),
    gamma_corr: finite.min(-1).max(1).optional(),
    sigma_b_sq: gammaParamsSchema.optional(),
    sigma_w_sq: gammaParamsSchema.optional(),
  })
  .superRefine((v, ctx) => {
    const kind = v.kind ?? "independent";
    if (kind === "copula" && v.gamma_corr === undefined) {
      ctx.addIssue({ code: "custom", message: "copula joint needs gamma_corr" });
    }
    if (kind !== "copula" && v.gamma_corr !== undefined) {
      ctx.addIssue({ code: "custom", message: "gamma_corr only applies to the copula joint" });
    }
    const components = v.sigma_b_sq !== undefined && v.sigma_w_sq !== undefined;
    if (kind === "induced" && !components) {
      ctx.addIssue({
        code: "custom",
        message: "induced joint needs sigma_b_sq and sigma_w_sq gamma blocks",
      });
    }
    if (kind !== "induced" && (v.sigma_b_sq !== undefined || v.sigma_w_sq !== undefined)) {
      ctx.addIssue({
        code: "custom",
        message: "variance-component blocks only apply to the induced joint",
      });
    }
  });

function marginalsMatchJoint(
  v: { joint?: { kind?: string }; rho?: unknown; sigma?: unknown },
  ctx: z.RefinementCtx,
): void {
  const kind = v.joint?.kind ?? "independent";
  if (kind === "induced") {
    if (v.rho !== undefined || v.sigma !== undefined) {
      ctx.addIssue({
        code: "custom",
        message: "induced joint derives rho and sigma; do not give their marginals",
      });
    }
  } else if (v.rho === undefined || v.sigma === undefined) {
    ctx.addIssue({ code: "custom", message: "rho and sigma marginals are required" });
  }
}

const priorSchema = z
  .strictObject({
    joint: jointSchema.optional(),
    rho: marginalSchema.optional(),
    sigma: marginalSchema.optional(),
    nu: marginalSchema,
  })
  .superRefine(marginalsMatchJoint);

const labeledPriorSchema = z
  .strictObject({
    label: z.string().min(1),
    joint: jointSchema.optional(),
    rho: marginalSchema.optional(),
    sigma: marginalSchema.optional(),
    nu: marginalSchema,
  })
  .superRefine(marginalsMatchJoint);

const designSchema = z
  .strictObject({
    delta_m: finite.positive(),
    alpha: finite.gt(0).lt(1).optional(),
    sidedness: z.enum(["two-sided", "one-sided"]).optional(),
    clusters: z.int().min(2).optional(),
    cluster_size: finite.min(1).optional(),
    s: z.int().min(1).optional(),
    seed: z.int().optional(),
  })
  .superRefine((v, ctx) => {
    if (v.clusters !== undefined && v.clusters % 2 !== 0) {
      ctx.addIssue({
        code: "custom",
        path: ["clusters"],
        message: "clusters must be even (1:1 allocation)",
      });
    }
  });

const rangeValue = z.union([z.string().min(1), z.array(finite).min(1)]);

const rangesSchema = z.strictObject({
  n_bar: rangeValue.optional(),
  nu: rangeValue.optional(),
});

const searchSchema = z
  .strictObject({
    mode: z.enum(["power", "assurance"]).optional(),
    target: finite.gt(0).lt(1).optional(),
    targets: z.array(finite.gt(0).lt(1)).min(1).optional(),
    direction: z.enum(["n_bar", "clusters"]).optional(),
    n_max: z.int().min(1).optional(),
    c_max: z.int().min(2).optional(),
    clusters: z.array(z.int().min(2)).min(1).optional(),
    ranges: rangesSchema.optional(),
  })
  .superRefine((v, ctx) => {
    for (const c of v.clusters ?? []) {
      if (c % 2 !== 0) {
        ctx.addIssue({
          code: "custom",
          path: ["clusters"],
          message: `clusters entries must be even and >= 2, got ${c}`,
        });
      }
    }
  });

const simSchema = z.strictObject({
  reps: z.int().min(100).optional(),
  delta_true: finite.optional(),
  intercept: finite.optional(),
});

const outputKinds = z.enum([
  "power",
  "assurance",
  "samplesize",
  "curve",
  "nu-sweep",
  "compare-priors",
  "validate",
]);

export const scenarioSchema = z
  .strictObject({
    design: designSchema,
    prior: priorSchema.optional(),
    priors: z.array(labeledPriorSchema).min(1).optional(),
    search: searchSchema.optional(),
    sim: simSchema.optional(),
    outputs: z.array(outputKinds).optional(),
  })
  .superRefine((v, ctx) => {
    if ((v.prior === undefined) === (v.priors === undefined)) {
      ctx.addIssue({ code: "custom", message: "give exactly one of prior or priors" });
    }
    const labels = (v.priors ?? []).map((p) => p.label);
    if (new Set(labels).size !== labels.length) {
      ctx.addIssue({ code: "custom", path: ["priors"], message: "prior labels must be unique" });
    }
  });

export type MarginalDoc = z.infer<typeof marginalSchema>;
export type PriorDoc = z.infer<typeof priorSchema>;
export type LabeledPriorDoc = z.infer<typeof labeledPriorSchema>;
export type DesignDoc = z.infer<typeof designSchema>;
export type SearchDoc = z.infer<typeof searchSchema>;
export type ScenarioDocument = z.infer<typeof scenarioSchema>;

/** "/design/delta_m: Number must be greater than 0" style lines. */
export function issuePaths(error: z.ZodError): string[] {
  return error.issues.map((issue) => {
    const path = issue.path.length ? `/${issue.path.join("/")}` : "";
    return `${path}: ${issue.message}`;
  });
}

export interface ValidOutcome {
  ok: true;
  doc: ScenarioDocument;
}

export interface InvalidOutcome {
  ok: false;
  errors: string[];
}

/**
 * Validate a parsed mapping. On success the ORIGINAL value is returned,
 * not zod's copy, so optional fields the user never wrote stay absent in
 * exported files and request bodies.
 */
export function checkScenario(raw: unknown): ValidOutcome | InvalidOutcome {
  const outcome = scenarioSchema.safeParse(raw);
  if (!outcome.success) {
    return { ok: false, errors: issuePaths(outcome.error) };
  }
  return { ok: true, doc: raw as ScenarioDocument };
}
