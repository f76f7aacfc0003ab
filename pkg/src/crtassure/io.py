"""Scenario files, sample files, result serialisation and bundled presets.

A scenario is one YAML document describing one reproducible run: a `design`
block (effect size, test settings, cluster layout, Monte Carlo budget), a
`prior` block (one marginal per nuisance parameter plus an optional joint),
an optional `priors` list for sensitivity comparisons, and a `search` block
steering the minimal-design routines. Unknown keys anywhere are rejected
with the offending path, so typos fail loudly before any computation.

Results serialise to JSON (lossless, embeds seed/S/digest, round-trips via
`load_results`) or to comma-separated tables with a header row.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from importlib import resources
from pathlib import Path
from typing import Literal, Optional, Union

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from .assurance import AssuranceEstimate
from .distributions import EmpiricalDist, GammaSpec, LogitNormalSpec
from .power import DEFAULT_S, DEFAULT_SEED, NuisanceParams
from .priors import (
    CopulaJointSpec,
    IndependentJointSpec,
    InducedJointSpec,
    MarginalPrior,
    PriorSpec,
    canonical_digest,
    fit_icc_from_quantiles,
    gamma_from_mean_var,
    marginal_medians,
)
from .search import CurvePoint, SampleSizeResult, SensitivityRow, SweepCurve

__all__ = [
    "ComparisonResult",
    "CurveResult",
    "ScenarioDocument",
    "ScenarioError",
    "SweepResult",
    "ValidationReport",
    "load_icc_samples",
    "load_preset",
    "load_results",
    "load_scenario",
    "parse_range",
    "preset_names",
    "write_results",
]


class ScenarioError(ValueError):
    """Scenario content is invalid; message carries the offending path."""


# ---------------------------------------------------------------------------
# scenario schema
# ---------------------------------------------------------------------------


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class GammaParamsDoc(_Strict):
    """Gamma written either as (shape, rate) or as (mean, var)."""

    shape: Optional[float] = None
    rate: Optional[float] = None
    mean: Optional[float] = None
    var: Optional[float] = None

    @model_validator(mode="after")
    def _one_parameterisation(self) -> "GammaParamsDoc":
        direct = self.shape is not None or self.rate is not None
        moments = self.mean is not None or self.var is not None
        if direct == moments:
            raise ValueError("give either shape+rate or mean+var")
        if direct and (self.shape is None or self.rate is None):
            raise ValueError("shape and rate must be given together")
        if moments and (self.mean is None or self.var is None):
            raise ValueError("mean and var must be given together")
        return self

    def to_spec(self) -> GammaSpec:
        if self.shape is not None:
            return GammaSpec(shape=self.shape, rate=self.rate)
        return gamma_from_mean_var(self.mean, self.var)


class MarginalDoc(_Strict):
    """One prior marginal; the fields allowed depend on `kind`.

    point:        value
    gamma:        shape+rate | mean+var
    logit-normal: mu+sigma_logit | median+ci95
    empirical:    samples | file (one value per line, # comments)
    """

    kind: Literal["point", "gamma", "empirical", "logit-normal"]
    value: Optional[float] = None
    shape: Optional[float] = None
    rate: Optional[float] = None
    mean: Optional[float] = None
    var: Optional[float] = None
    mu: Optional[float] = None
    sigma_logit: Optional[float] = None
    median: Optional[float] = None
    ci95: Optional[tuple[float, float]] = None
    samples: Optional[list[float]] = None
    file: Optional[str] = None

    _ALLOWED = {
        "point": {"value"},
        "gamma": {"shape", "rate", "mean", "var"},
        "logit-normal": {"mu", "sigma_logit", "median", "ci95"},
        "empirical": {"samples", "file"},
    }

    @model_validator(mode="after")
    def _fields_match_kind(self) -> "MarginalDoc":
        given = {
            name
            for name in type(self).model_fields
            if name != "kind" and getattr(self, name) is not None
        }
        allowed = self._ALLOWED[self.kind]
        stray = given - allowed
        if stray:
            raise ValueError(f"{sorted(stray)} not valid for kind={self.kind}")
        if self.kind == "point" and self.value is None:
            raise ValueError("point marginal needs a value")
        if self.kind == "gamma":
            GammaParamsDoc(shape=self.shape, rate=self.rate, mean=self.mean, var=self.var)
        if self.kind == "logit-normal":
            direct = {"mu", "sigma_logit"} & given
            fitted = {"median", "ci95"} & given
            if bool(direct) == bool(fitted):
                raise ValueError("give either mu+sigma_logit or median+ci95")
            if direct != {"mu", "sigma_logit"} and fitted != {"median", "ci95"}:
                raise ValueError("incomplete logit-normal parameterisation")
        if self.kind == "empirical" and (self.samples is None) == (self.file is None):
            raise ValueError("give either samples or a file reference")
        return self

    def to_marginal(self, base_dir: Path) -> MarginalPrior:
        if self.kind == "point":
            return MarginalPrior.point(self.value)
        if self.kind == "gamma":
            doc = GammaParamsDoc(shape=self.shape, rate=self.rate, mean=self.mean, var=self.var)
            return MarginalPrior.gamma(doc.to_spec())
        if self.kind == "logit-normal":
            if self.mu is not None:
                return MarginalPrior.logit_normal(
                    LogitNormalSpec(mu=self.mu, sigma_logit=self.sigma_logit)
                )
            lo, hi = self.ci95
            return MarginalPrior.logit_normal(fit_icc_from_quantiles(self.median, lo, hi))
        if self.samples is not None:
            return MarginalPrior.empirical(EmpiricalDist(tuple(self.samples)))
        values = load_icc_samples(base_dir / self.file)
        return MarginalPrior.empirical(EmpiricalDist(tuple(values)))


class JointDoc(_Strict):
    kind: Literal["independent", "copula", "induced"] = "independent"
    gamma_corr: Optional[float] = None
    sigma_b_sq: Optional[GammaParamsDoc] = None
    sigma_w_sq: Optional[GammaParamsDoc] = None

    @model_validator(mode="after")
    def _fields_match_kind(self) -> "JointDoc":
        if self.kind == "copula" and self.gamma_corr is None:
            raise ValueError("copula joint needs gamma_corr")
        if self.kind != "copula" and self.gamma_corr is not None:
            raise ValueError("gamma_corr only applies to the copula joint")
        has_components = self.sigma_b_sq is not None and self.sigma_w_sq is not None
        if self.kind == "induced" and not has_components:
            raise ValueError("induced joint needs sigma_b_sq and sigma_w_sq gamma blocks")
        if self.kind != "induced" and (self.sigma_b_sq or self.sigma_w_sq):
            raise ValueError("variance-component blocks only apply to the induced joint")
        return self


class PriorDoc(_Strict):
    joint: JointDoc = JointDoc()
    rho: Optional[MarginalDoc] = None
    sigma: Optional[MarginalDoc] = None
    nu: MarginalDoc

    @model_validator(mode="after")
    def _marginals_match_joint(self) -> "PriorDoc":
        if self.joint.kind == "induced":
            if self.rho is not None or self.sigma is not None:
                raise ValueError(
                    "induced joint derives rho and sigma from the variance components; "
                    "do not give their marginals"
                )
        elif self.rho is None or self.sigma is None:
            raise ValueError("rho and sigma marginals are required")
        return self

    def to_spec(self, base_dir: Path) -> PriorSpec:
        nu = self.nu.to_marginal(base_dir)
        if self.joint.kind == "induced":
            joint = InducedJointSpec(
                sigma_b_sq=self.joint.sigma_b_sq.to_spec(),
                sigma_w_sq=self.joint.sigma_w_sq.to_spec(),
            )
            return PriorSpec(joint=joint, nu=nu)
        rho = self.rho.to_marginal(base_dir)
        sigma = self.sigma.to_marginal(base_dir)
        if self.joint.kind == "copula":
            return PriorSpec(
                joint=CopulaJointSpec(rho=rho, sigma=sigma, gamma_corr=self.joint.gamma_corr),
                nu=nu,
            )
        return PriorSpec(joint=IndependentJointSpec(rho=rho, sigma=sigma), nu=nu)


class LabeledPriorDoc(PriorDoc):
    label: str = Field(min_length=1)


class DesignDoc(_Strict):
    delta_m: float = Field(gt=0)
    alpha: float = Field(default=0.05, gt=0, lt=1)
    sidedness: Literal["two-sided", "one-sided"] = "two-sided"
    clusters: Optional[int] = Field(default=None, ge=2)
    cluster_size: Optional[float] = Field(default=None, ge=1)
    s: int = Field(default=DEFAULT_S, ge=1)
    seed: int = DEFAULT_SEED

    @model_validator(mode="after")
    def _even_clusters(self) -> "DesignDoc":
        if self.clusters is not None and self.clusters % 2 != 0:
            raise ValueError("clusters must be even (1:1 allocation)")
        return self


class RangesDoc(_Strict):
    n_bar: Optional[Union[str, list[float]]] = None
    nu: Optional[Union[str, list[float]]] = None

    def n_bar_values(self) -> Optional[list[float]]:
        return parse_range(self.n_bar) if self.n_bar is not None else None

    def nu_values(self) -> Optional[list[float]]:
        return parse_range(self.nu) if self.nu is not None else None


class SearchDoc(_Strict):
    mode: Literal["power", "assurance"] = "assurance"
    target: float = Field(default=0.8, gt=0, lt=1)
    targets: Optional[list[float]] = None
    direction: Literal["n_bar", "clusters"] = "n_bar"
    n_max: int = Field(default=10_000, ge=1)
    c_max: int = Field(default=10_000, ge=2)
    clusters: Optional[list[int]] = None
    ranges: RangesDoc = RangesDoc()

    @model_validator(mode="after")
    def _target_lists_valid(self) -> "SearchDoc":
        for t in self.targets or []:
            if not (0 < t < 1):
                raise ValueError(f"targets must lie in (0, 1), got {t}")
        for c in self.clusters or []:
            if c < 2 or c % 2 != 0:
                raise ValueError(f"clusters entries must be even and >= 2, got {c}")
        return self


class SimDoc(_Strict):
    reps: int = Field(default=10_000, ge=100)
    delta_true: Optional[float] = None
    intercept: float = 0.0


_OUTPUT_KINDS = {
    "power",
    "assurance",
    "samplesize",
    "curve",
    "nu-sweep",
    "compare-priors",
    "validate",
}


class ScenarioDocument(_Strict):
    """One validated scenario file, plus helpers building runtime objects."""

    design: DesignDoc
    prior: Optional[PriorDoc] = None
    priors: Optional[list[LabeledPriorDoc]] = None
    search: SearchDoc = SearchDoc()
    sim: SimDoc = SimDoc()
    outputs: list[str] = []

    _base_dir: Path = Path(".")

    @model_validator(mode="after")
    def _exactly_one_prior_block(self) -> "ScenarioDocument":
        if (self.prior is None) == (self.priors is None):
            raise ValueError("give exactly one of prior or priors")
        if self.priors is not None:
            labels = [p.label for p in self.priors]
            if len(set(labels)) != len(labels):
                raise ValueError("prior labels must be unique")
        stray = set(self.outputs) - _OUTPUT_KINDS
        if stray:
            raise ValueError(f"unknown outputs {sorted(stray)}")
        return self

    def prior_spec(self) -> PriorSpec:
        if self.prior is None:
            raise ScenarioError("scenario holds a priors list, not a single prior")
        return self.prior.to_spec(self._base_dir)

    def labeled_priors(self) -> list[tuple[str, PriorSpec]]:
        if self.priors is None:
            return [("prior", self.prior_spec())]
        return [(p.label, p.to_spec(self._base_dir)) for p in self.priors]

    def point_params(self) -> NuisanceParams:
        """Nuisance point for power mode: marginal medians of the prior."""
        return marginal_medians(self.prior_spec())

    def effective_prior(self) -> Union[PriorSpec, NuisanceParams]:
        return self.point_params() if self.search.mode == "power" else self.prior_spec()


def parse_range(token: Union[str, list[float]]) -> list[float]:
    """Grid values from a list, a comma list, or start:stop:step (inclusive)."""
    if isinstance(token, list):
        if not token:
            raise ScenarioError("range list must be non-empty")
        return [float(v) for v in token]
    if ":" not in token:
        try:
            values = [float(v) for v in token.split(",") if v.strip()]
        except ValueError as exc:
            raise ScenarioError(f"range must be numeric, got {token!r}") from exc
        if not values:
            raise ScenarioError("range list must be non-empty")
        return values
    parts = token.split(":")
    if len(parts) != 3:
        raise ScenarioError(f"range string must be start:stop:step, got {token!r}")
    try:
        start, stop, step = (float(p) for p in parts)
    except ValueError as exc:
        raise ScenarioError(f"range string must be numeric, got {token!r}") from exc
    if step <= 0 or stop < start:
        raise ScenarioError(f"range needs step > 0 and stop >= start, got {token!r}")
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    return [round(start + i * step, 10) for i in range(count)]


def _pointer(loc: tuple) -> str:
    return "/" + "/".join(str(part) for part in loc)


def _document_from_mapping(raw: object, base_dir: Path, source: str) -> ScenarioDocument:
    if not isinstance(raw, dict):
        raise ScenarioError(f"{source}: scenario must be a key-value document")
    try:
        doc = ScenarioDocument.model_validate(raw)
    except ValidationError as exc:
        lines = [f"{_pointer(e['loc'])}: {e['msg']}" for e in exc.errors()]
        raise ScenarioError(f"{source}: invalid scenario\n" + "\n".join(lines)) from exc
    object.__setattr__(doc, "_base_dir", base_dir)
    # build every prior now so support violations surface at load time
    try:
        doc.labeled_priors()
    except (ValueError, TypeError) as exc:
        if isinstance(exc, ScenarioError):
            raise
        raise ScenarioError(f"{source}: /prior: {exc}") from exc
    return doc


def load_scenario(path: Union[str, Path]) -> ScenarioDocument:
    """Parse and fully validate one scenario file."""
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    try:
        raw = yaml.safe_load(text)
    except yaml.MarkedYAMLError as exc:
        mark = exc.problem_mark
        where = f"line {mark.line + 1}, column {mark.column + 1}" if mark else "unknown position"
        raise ScenarioError(f"{path}: parse error at {where}: {exc.problem}") from exc
    except yaml.YAMLError as exc:
        raise ScenarioError(f"{path}: parse error: {exc}") from exc
    return _document_from_mapping(raw, path.parent, str(path))


def scenario_from_mapping(raw: dict, base_dir: Union[str, Path] = ".") -> ScenarioDocument:
    """Validate an already-parsed scenario mapping (service request bodies)."""
    return _document_from_mapping(raw, Path(base_dir), "request")


def load_icc_samples(path: Union[str, Path]) -> list[float]:
    """Read correlation samples: one value per line, # starts a comment."""
    path = Path(path)
    values = []
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        try:
            value = float(body)
        except ValueError as exc:
            raise ScenarioError(f"{path}:{lineno}: not a number: {body!r}") from exc
        if not (0.0 <= value < 1.0):
            raise ScenarioError(f"{path}:{lineno}: sample {value} outside [0, 1)")
        values.append(value)
    if not values:
        raise ScenarioError(f"{path}: no samples found")
    return values


# ---------------------------------------------------------------------------
# result envelopes and serialisation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CurveResult:
    """A criterion curve over cluster sizes, with enough context to rerun."""

    delta_m: float
    c_total: int
    alpha: float
    sidedness: str
    method: str
    points: list[CurvePoint]
    s: int
    seed: int
    spec_digest: str


@dataclass(frozen=True)
class SweepResult:
    """Curves indexed by cluster-size CV, shared (sigma, rho) draws."""

    delta_m: float
    c_total: int
    alpha: float
    sidedness: str
    curves: list[SweepCurve]
    s: int
    seed: int
    spec_digest: str


@dataclass(frozen=True)
class ComparisonResult:
    """Sensitivity grid rows plus the run settings they came from."""

    delta_m: float
    alpha: float
    sidedness: str
    targets: list[float]
    c_values: list[int]
    rows: list[SensitivityRow]
    s: int
    seed: int
    spec_digest: str


@dataclass(frozen=True)
class ValidationReport:
    """Simulator-vs-formula comparison at one design point."""

    delta_m: float
    sigma: float
    rho: float
    nu: float
    c_total: int
    n_bar: int
    alpha: float
    sidedness: str
    reps: int
    seed: int
    empirical: float
    stderr: float
    formula: float
    abs_error: float


def comparison_digest(scenarios: list[tuple[str, object]]) -> str:
    from .priors import point_digest, prior_digest

    parts = {}
    for label, prior in scenarios:
        if isinstance(prior, NuisanceParams):
            parts[label] = point_digest(prior)
        else:
            parts[label] = prior_digest(prior)
    return canonical_digest({"scenarios": parts})


_RESULT_TAGS = {
    "assurance": AssuranceEstimate,
    "samplesize": SampleSizeResult,
    "curve": CurveResult,
    "nu-sweep": SweepResult,
    "compare-priors": ComparisonResult,
    "validate": ValidationReport,
}
_TAG_BY_TYPE = {cls: tag for tag, cls in _RESULT_TAGS.items()}

Result = Union[
    AssuranceEstimate,
    SampleSizeResult,
    CurveResult,
    SweepResult,
    ComparisonResult,
    ValidationReport,
]


def result_payload(result: Result) -> dict:
    """JSON-ready mapping with a type tag; inverse of `result_from_payload`."""
    tag = _TAG_BY_TYPE.get(type(result))
    if tag is None:
        raise TypeError(f"unsupported result type {type(result).__name__}")
    return {"type": tag, **asdict(result)}


def result_from_payload(payload: dict) -> Result:
    kind = payload.get("type")
    cls = _RESULT_TAGS.get(kind)
    if cls is None:
        raise ScenarioError(f"unknown result type {kind!r}")
    body = {k: v for k, v in payload.items() if k != "type"}
    if cls is CurveResult:
        body["points"] = [CurvePoint(**p) for p in body["points"]]
    elif cls is SweepResult:
        body["curves"] = [
            SweepCurve(nu=c["nu"], points=[CurvePoint(**p) for p in c["points"]])
            for c in body["curves"]
        ]
    elif cls is ComparisonResult:
        body["rows"] = [SensitivityRow(**r) for r in body["rows"]]
    return cls(**body)


def _csv_rows(result: Result) -> tuple[list[str], list[list]]:
    if isinstance(result, CurveResult):
        header = ["n_bar", "value", "mc_stderr"]
        return header, [[p.n_bar, p.value, p.mc_stderr] for p in result.points]
    if isinstance(result, SweepResult):
        header = ["nu", "n_bar", "value", "mc_stderr"]
        rows = [
            [c.nu, p.n_bar, p.value, p.mc_stderr] for c in result.curves for p in c.points
        ]
        return header, rows
    if isinstance(result, ComparisonResult):
        # one row per scenario x C, method/target pairs spread across columns
        header = ["scenario", "clusters"]
        combos = [
            (method, target)
            for method in ("power", "assurance")
            for target in result.targets
        ]
        for method, target in combos:
            header += [f"{method}_{target}_n_bar", f"{method}_{target}_n_total"]
        cells = {
            (r.scenario_label, r.c_total, r.method, r.target): r for r in result.rows
        }
        labels = list(dict.fromkeys(r.scenario_label for r in result.rows))
        rows = []
        for label in labels:
            for c_total in result.c_values:
                row = [label, c_total]
                for method, target in combos:
                    hit = cells.get((label, c_total, method, target))
                    if hit is None or not hit.feasible:
                        row += ["", ""]
                    else:
                        row += [hit.n_bar, hit.n_total]
                rows.append(row)
        return header, rows
    # flat single-record types
    body = asdict(result)
    return list(body), [list(body.values())]


def write_results(result: Result, path: Union[str, Path], format: str = "json") -> Path:
    """Serialise a result; JSON is lossless, csv is a header + data table."""
    path = Path(path)
    if format == "json":
        text = json.dumps(result_payload(result), indent=2, sort_keys=True) + "\n"
        path.write_text(text, encoding="utf-8")
    elif format == "csv":
        header, rows = _csv_rows(result)
        lines = [",".join(str(v) for v in header)]
        lines += [",".join("" if v is None else str(v) for v in row) for row in rows]
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    else:
        raise ValueError(f"format must be json or csv, got {format!r}")
    return path


def load_results(path: Union[str, Path]) -> Result:
    """Inverse of `write_results(..., format="json")`."""
    payload = json.loads(Path(path).read_text(encoding="utf-8"))
    return result_from_payload(payload)


# ---------------------------------------------------------------------------
# bundled presets
# ---------------------------------------------------------------------------


def _preset_root():
    return resources.files("crtassure").joinpath("presets")


def preset_names() -> list[str]:
    return sorted(
        entry.name.removesuffix(".scenario")
        for entry in _preset_root().iterdir()
        if entry.name.endswith(".scenario")
    )


def preset_text(name: str) -> str:
    entry = _preset_root().joinpath(f"{name}.scenario")
    try:
        return entry.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise ScenarioError(f"no bundled preset named {name!r}; have {preset_names()}")


def load_preset(name: str) -> ScenarioDocument:
    raw = yaml.safe_load(preset_text(name))
    return _document_from_mapping(raw, Path("."), f"preset:{name}")
