"""Stateless HTTP JSON API over the core calculations.

Request bodies are scenario documents, exactly the mapping a scenario file
holds, so anything the web UI sends can be saved verbatim and replayed
through the CLI. Every successful response carries the request digest, the
effective seed/S and the prior digest; identical body and seed give a
byte-identical body (timing travels in the X-Compute-Ms header so it never
perturbs caching).

Errors: 400 for schema/limit violations (path-qualified where possible),
422 for infeasible targets (the achievable plateau is included), and no
expected 500s for valid input.
"""

from __future__ import annotations

import json
import os
import time
from typing import Optional, Sequence

from fastapi import FastAPI, Request, Response
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse

from . import io as cio
from .assurance import AssuranceEstimate, assurance
from .power import NuisanceParams, power
from .priors import (
    NuisanceDrawSet,
    canonical_digest,
    point_digest,
    prior_digest,
    sample_prior,
)
from .search import (
    SearchBudgetError,
    curve as criterion_curve,
    min_cluster_size,
    min_clusters,
    nu_sweep,
    prior_comparison,
)

MAX_DRAWS = 10**6
MAX_CURVE_POINTS = 10**3
DEFAULT_TIME_BUDGET_S = 30.0
# conservative throughput assumption used to pre-reject oversized work
_UNITS_PER_SECOND = 2e6
_SEARCH_EVALS = 40


class _ApiError(Exception):
    def __init__(self, status: int, detail) -> None:
        super().__init__(str(detail))
        self.status = status
        self.detail = detail


def _bad_request(message: str) -> _ApiError:
    return _ApiError(400, message)


def _check_limits(doc: cio.ScenarioDocument, work_units: float, budget_s: float) -> None:
    if doc.design.s > MAX_DRAWS:
        raise _bad_request(f"/design/s: draw count {doc.design.s} exceeds the {MAX_DRAWS} cap")
    seconds = work_units / _UNITS_PER_SECOND
    if seconds > budget_s:
        raise _bad_request(
            f"request projected to take about {seconds:.0f}s, over the {budget_s:g}s budget; "
            "reduce draws or grid points"
        )


def _grid(doc: cio.ScenarioDocument, field: str) -> list[float]:
    values = getattr(doc.search.ranges, f"{field}_values")()
    if values is None:
        raise _bad_request(f"/search/ranges/{field}: required for this operation")
    if len(values) > MAX_CURVE_POINTS:
        raise _bad_request(
            f"/search/ranges/{field}: {len(values)} points exceeds the {MAX_CURVE_POINTS} cap"
        )
    return values


def _required(value, path: str):
    if value is None:
        raise _bad_request(f"{path}: required for this operation")
    return value


def _scenario(body: dict) -> cio.ScenarioDocument:
    try:
        return cio.scenario_from_mapping(body)
    except cio.ScenarioError as exc:
        raise _ApiError(400, str(exc))


def _canonical_response(payload: dict, started: float) -> Response:
    body = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    elapsed_ms = (time.perf_counter() - started) * 1000.0
    return Response(
        content=body,
        media_type="application/json",
        headers={"X-Compute-Ms": f"{elapsed_ms:.1f}"},
    )


def _envelope(operation: str, body: dict, spec_digest: str, seed: int, s: int, result) -> dict:
    return {
        "operation": operation,
        "request_digest": canonical_digest(body),
        "spec_digest": spec_digest,
        "seed": seed,
        "s": s,
        "result": cio.result_payload(result),
    }


def _prior_and_digest(doc: cio.ScenarioDocument):
    """Effective prior for the scenario's mode, with its digest."""
    prior = doc.effective_prior()
    if isinstance(prior, NuisanceParams):
        return prior, point_digest(prior)
    return prior, prior_digest(prior)


def create_app(
    cors_origins: Optional[Sequence[str]] = None,
    time_budget_s: Optional[float] = None,
) -> FastAPI:
    if time_budget_s is None:
        time_budget_s = float(os.environ.get("CRTASSURE_TIME_BUDGET_S", DEFAULT_TIME_BUDGET_S))
    if cors_origins is None:
        env_origins = os.environ.get("CRTASSURE_CORS", "")
        cors_origins = [o for o in env_origins.split(",") if o.strip()]

    app = FastAPI(title="crtassure", docs_url=None, redoc_url=None)

    if cors_origins:
        from fastapi.middleware.cors import CORSMiddleware

        app.add_middleware(
            CORSMiddleware,
            allow_origins=list(cors_origins),
            allow_methods=["*"],
            allow_headers=["*"],
        )

    @app.exception_handler(_ApiError)
    async def _api_error(request: Request, exc: _ApiError):
        return JSONResponse(status_code=exc.status, content={"detail": exc.detail})

    @app.exception_handler(RequestValidationError)
    async def _schema_error(request: Request, exc: RequestValidationError):
        detail = [
            "/" + "/".join(str(p) for p in err["loc"]) + ": " + err["msg"]
            for err in exc.errors()
        ]
        return JSONResponse(status_code=400, content={"detail": detail})

    @app.exception_handler(ValueError)
    async def _value_error(request: Request, exc: ValueError):
        return JSONResponse(status_code=400, content={"detail": str(exc)})

    @app.get("/healthz")
    async def healthz():
        return {"status": "ok"}

    @app.get("/api/presets")
    async def presets():
        import yaml

        entries = []
        for name in cio.preset_names():
            text = cio.preset_text(name)
            entries.append({"name": name, "text": text, "scenario": yaml.safe_load(text)})
        return {"presets": entries}

    @app.get("/api/schema")
    async def schema():
        return cio.ScenarioDocument.model_json_schema()

    @app.post("/api/power")
    def api_power(body: dict):
        started = time.perf_counter()
        doc = _scenario(body)
        _check_limits(doc, 1.0, time_budget_s)
        point = doc.point_params()
        c_total = int(_required(doc.design.clusters, "/design/clusters"))
        n_bar = _required(doc.design.cluster_size, "/design/cluster_size")
        value = power(doc.design.delta_m, point, c_total, n_bar,
                      doc.design.alpha, doc.design.sidedness)
        result = AssuranceEstimate(
            value=value,
            mc_stderr=0.0,
            s=1,
            c_total=c_total,
            n_bar=float(n_bar),
            seed=doc.design.seed,
            spec_digest=point_digest(point),
        )
        payload = _envelope("power", body, point_digest(point), doc.design.seed, 1, result)
        return _canonical_response(payload, started)

    @app.post("/api/assurance")
    def api_assurance(body: dict):
        started = time.perf_counter()
        doc = _scenario(body)
        _check_limits(doc, float(doc.design.s), time_budget_s)
        c_total = int(_required(doc.design.clusters, "/design/clusters"))
        n_bar = _required(doc.design.cluster_size, "/design/cluster_size")
        prior, digest = _prior_and_digest(doc)
        if isinstance(prior, NuisanceParams):
            draw_set = NuisanceDrawSet.from_point(prior, seed=doc.design.seed)
        else:
            draw_set = sample_prior(prior, doc.design.s, doc.design.seed)
        result = assurance(doc.design.delta_m, draw_set, c_total, n_bar,
                           doc.design.alpha, doc.design.sidedness)
        payload = _envelope("assurance", body, digest, result.seed, result.s, result)
        return _canonical_response(payload, started)

    @app.post("/api/samplesize")
    def api_samplesize(body: dict):
        started = time.perf_counter()
        doc = _scenario(body)
        _check_limits(doc, float(doc.design.s) * _SEARCH_EVALS, time_budget_s)
        prior, digest = _prior_and_digest(doc)
        common = dict(
            alpha=doc.design.alpha,
            sidedness=doc.design.sidedness,
            s=doc.design.s,
            seed=doc.design.seed,
        )
        try:
            if doc.search.direction == "n_bar":
                c_total = int(_required(doc.design.clusters, "/design/clusters"))
                result = min_cluster_size(
                    doc.search.target, c_total, doc.design.delta_m, prior,
                    n_max=doc.search.n_max, **common,
                )
            else:
                n_bar = _required(doc.design.cluster_size, "/design/cluster_size")
                result = min_clusters(
                    doc.search.target, n_bar, doc.design.delta_m, prior,
                    c_max=doc.search.c_max, **common,
                )
        except SearchBudgetError as exc:
            raise _ApiError(422, str(exc))
        if not result.feasible:
            raise _ApiError(
                422,
                {
                    "message": "target exceeds the achievable plateau",
                    "target": result.target,
                    "plateau": result.plateau,
                    "result": cio.result_payload(result),
                },
            )
        payload = _envelope("samplesize", body, digest, result.seed, result.s, result)
        return _canonical_response(payload, started)

    @app.post("/api/curve")
    def api_curve(body: dict):
        started = time.perf_counter()
        doc = _scenario(body)
        grid = _grid(doc, "n_bar")
        _check_limits(doc, float(doc.design.s) * len(grid), time_budget_s)
        c_total = int(_required(doc.design.clusters, "/design/clusters"))
        prior, digest = _prior_and_digest(doc)
        points = criterion_curve(
            doc.design.delta_m, prior, c_total, grid,
            alpha=doc.design.alpha, sidedness=doc.design.sidedness,
            s=doc.design.s, seed=doc.design.seed,
        )
        is_point = isinstance(prior, NuisanceParams)
        effective_s = 1 if is_point else doc.design.s
        result = cio.CurveResult(
            delta_m=doc.design.delta_m,
            c_total=c_total,
            alpha=doc.design.alpha,
            sidedness=doc.design.sidedness,
            method="power" if is_point else "assurance",
            points=points,
            s=effective_s,
            seed=doc.design.seed,
            spec_digest=digest,
        )
        payload = _envelope("curve", body, digest, doc.design.seed, effective_s, result)
        return _canonical_response(payload, started)

    @app.post("/api/nu-sweep")
    def api_nu_sweep(body: dict):
        started = time.perf_counter()
        doc = _scenario(body)
        nu_values = _grid(doc, "nu")
        grid = _grid(doc, "n_bar")
        _check_limits(
            doc, float(doc.design.s) * len(grid) * len(nu_values), time_budget_s
        )
        c_total = int(_required(doc.design.clusters, "/design/clusters"))
        spec = doc.prior_spec()
        if not hasattr(spec.joint, "rho"):
            raise _bad_request("/prior/joint: nu-sweep needs an explicit rho marginal")
        sigma = doc.point_params().sigma
        curves = nu_sweep(
            doc.design.delta_m, spec.joint.rho, sigma, nu_values, c_total, grid,
            alpha=doc.design.alpha, sidedness=doc.design.sidedness,
            s=doc.design.s, seed=doc.design.seed,
        )
        digest = canonical_digest(
            {"rho": spec.joint.rho.to_dict(), "sigma": sigma, "nu_values": nu_values}
        )
        result = cio.SweepResult(
            delta_m=doc.design.delta_m,
            c_total=c_total,
            alpha=doc.design.alpha,
            sidedness=doc.design.sidedness,
            curves=curves,
            s=doc.design.s,
            seed=doc.design.seed,
            spec_digest=digest,
        )
        payload = _envelope("nu-sweep", body, digest, doc.design.seed, doc.design.s, result)
        return _canonical_response(payload, started)

    @app.post("/api/compare-priors")
    def api_compare_priors(body: dict):
        started = time.perf_counter()
        doc = _scenario(body)
        scenarios = doc.labeled_priors()
        targets = doc.search.targets or [doc.search.target]
        c_values = doc.search.clusters or (
            [doc.design.clusters] if doc.design.clusters else None
        )
        c_values = _required(c_values, "/search/clusters")
        work = float(doc.design.s) * _SEARCH_EVALS * len(scenarios) * len(targets) * len(c_values) * 2
        _check_limits(doc, work, time_budget_s)
        rows = prior_comparison(
            scenarios, doc.design.delta_m, targets, c_values,
            alpha=doc.design.alpha, sidedness=doc.design.sidedness,
            s=doc.design.s, seed=doc.design.seed,
        )
        digest = cio.comparison_digest(scenarios)
        result = cio.ComparisonResult(
            delta_m=doc.design.delta_m,
            alpha=doc.design.alpha,
            sidedness=doc.design.sidedness,
            targets=list(targets),
            c_values=[int(c) for c in c_values],
            rows=rows,
            s=doc.design.s,
            seed=doc.design.seed,
            spec_digest=digest,
        )
        payload = _envelope(
            "compare-priors", body, digest, doc.design.seed, doc.design.s, result
        )
        return _canonical_response(payload, started)

    @app.post("/api/prior-sample")
    def api_prior_sample(body: dict):
        started = time.perf_counter()
        doc = _scenario(body)
        _check_limits(doc, float(doc.design.s), time_budget_s)
        spec = doc.prior_spec()
        draws = sample_prior(spec, doc.design.s, doc.design.seed)
        digest = prior_digest(spec)
        payload = {
            "operation": "prior-sample",
            "request_digest": canonical_digest(body),
            "spec_digest": digest,
            "seed": doc.design.seed,
            "s": doc.design.s,
            "result": {
                "sigma": draws.sigma.tolist(),
                "rho": draws.rho.tolist(),
                "nu": draws.nu.tolist(),
            },
        }
        return _canonical_response(payload, started)

    return app
