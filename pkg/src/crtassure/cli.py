"""Command-line interface.

Every subcommand accepts an optional scenario (a bundled preset name or a
path to a scenario file); flags override file values, which override the
built-in defaults. Human-readable output goes to stdout and always states
the effective seed and Monte Carlo draw count; `--out` additionally writes
a machine-readable file (JSON round-trips, csv is a plain table).

Exit codes: 0 success, 1 infeasible target (the achievable plateau is
reported), 2 invalid input, 3 file I/O failure.
"""

from __future__ import annotations

import functools
import sys
from pathlib import Path
from typing import Optional

import click

from . import io as cio
from .assurance import AssuranceEstimate, assurance
from .power import DEFAULT_S, DEFAULT_SEED, NuisanceParams, TWO_SIDED, power
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
from .trialsim import TrialSimConfig, empirical_power

_SIDEDNESS = {
    "one": "one-sided",
    "two": "two-sided",
    "one-sided": "one-sided",
    "two-sided": "two-sided",
}


def _load(scenario: Optional[str]) -> Optional[cio.ScenarioDocument]:
    if scenario is None:
        return None
    if scenario in cio.preset_names():
        return cio.load_preset(scenario)
    return cio.load_scenario(scenario)


def _guard(fn):
    """Map exception classes onto the documented exit codes."""

    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except SearchBudgetError as exc:
            click.echo(f"infeasible within budget: {exc}", err=True)
            sys.exit(1)
        except (cio.ScenarioError, ValueError, TypeError) as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(2)
        except OSError as exc:
            click.echo(f"i/o error: {exc}", err=True)
            sys.exit(3)

    return wrapper


def _pick(flag, doc_value, default=None):
    if flag is not None:
        return flag
    if doc_value is not None:
        return doc_value
    return default


def _require(value, name: str):
    if value is None:
        raise click.UsageError(f"{name} is required (flag or scenario file)")
    return value


def _design_values(doc, delta, clusters, cluster_size, alpha, sided, s, seed):
    d = doc.design if doc else None
    return {
        "delta_m": _pick(delta, d.delta_m if d else None),
        "c_total": _pick(clusters, d.clusters if d else None),
        "n_bar": _pick(cluster_size, d.cluster_size if d else None),
        "alpha": _pick(alpha, d.alpha if d else None, 0.05),
        "sidedness": _SIDEDNESS[_pick(sided, d.sidedness if d else None, TWO_SIDED)],
        "s": _pick(s, d.s if d else None, DEFAULT_S),
        "seed": _pick(seed, d.seed if d else None, DEFAULT_SEED),
    }


def _point_from(doc, sigma, rho, nu) -> NuisanceParams:
    if sigma is None and rho is None and nu is None and doc is not None:
        return doc.point_params()
    base = doc.point_params() if doc is not None else None
    return NuisanceParams(
        sigma=_require(_pick(sigma, base.sigma if base else None), "--sigma"),
        rho=_require(_pick(rho, base.rho if base else None), "--rho"),
        nu=_require(_pick(nu, base.nu if base else None), "--nu"),
    )


def _emit(result, out: Optional[str], fmt: Optional[str]) -> None:
    if out is None:
        return
    if fmt is None:
        fmt = "csv" if out.endswith(".csv") else "json"
    cio.write_results(result, Path(out), format=fmt)
    click.echo(f"wrote {fmt} to {out}")


def _provenance(seed: int, s: int) -> None:
    click.echo(f"seed {seed}  S {s}")


def _scenario_argument(fn):
    return click.argument("scenario", required=False)(fn)


def _out_options(fn):
    fn = click.option("--out", help="Write a machine-readable result file.")(fn)
    fn = click.option(
        "--format",
        "fmt",
        type=click.Choice(["json", "csv"]),
        help="Force the --out format (default: by extension).",
    )(fn)
    return fn


def _design_options(fn):
    for deco in reversed(
        [
            click.option("--delta", type=float, help="Effect size the test should detect."),
            click.option("--clusters", type=int, help="Total clusters, split 1:1."),
            click.option("--cluster-size", type=float, help="Mean cluster size."),
            click.option("--alpha", type=float, help="Significance level."),
            click.option(
                "--sided",
                type=click.Choice(sorted(_SIDEDNESS)),
                help="Tail convention of the Wald test.",
            ),
            click.option("--draws", "-S", "s", type=int, help="Monte Carlo draw count."),
            click.option("--seed", type=int, help="Seed for the draw set."),
        ]
    ):
        fn = deco(fn)
    return fn


def _point_options(fn):
    for deco in reversed(
        [
            click.option("--sigma", type=float, help="Total outcome SD."),
            click.option("--rho", type=float, help="Intracluster correlation."),
            click.option("--nu", type=float, help="Cluster-size CV."),
        ]
    ):
        fn = deco(fn)
    return fn


@click.group()
def main() -> None:
    """Power and assurance design calculations for cluster randomised trials."""


@main.command("power")
@_scenario_argument
@_design_options
@_point_options
@_out_options
@_guard
def power_cmd(scenario, delta, clusters, cluster_size, alpha, sided, s, seed,
              sigma, rho, nu, out, fmt):
    """Frequentist power at a fixed design and nuisance point."""
    doc = _load(scenario)
    design = _design_values(doc, delta, clusters, cluster_size, alpha, sided, s, seed)
    psi = _point_from(doc, sigma, rho, nu)
    delta_m = _require(design["delta_m"], "--delta")
    c_total = int(_require(design["c_total"], "--clusters"))
    n_bar = _require(design["n_bar"], "--cluster-size")
    value = power(delta_m, psi, c_total, n_bar, design["alpha"], design["sidedness"])
    click.echo(f"power {value:.6f}")
    click.echo(
        f"  delta {delta_m:g}  sigma {psi.sigma:g}  rho {psi.rho:g}  nu {psi.nu:g}"
    )
    click.echo(
        f"  clusters {c_total}  cluster size {n_bar:g}  "
        f"alpha {design['alpha']:g} {design['sidedness']}"
    )
    _provenance(design["seed"], 1)
    _emit(
        AssuranceEstimate(
            value=value,
            mc_stderr=0.0,
            s=1,
            c_total=c_total,
            n_bar=float(n_bar),
            seed=design["seed"],
            spec_digest=point_digest(psi),
        ),
        out,
        fmt,
    )


@main.command("assurance")
@_scenario_argument
@_design_options
@_point_options
@_out_options
@_guard
def assurance_cmd(scenario, delta, clusters, cluster_size, alpha, sided, s, seed,
                  sigma, rho, nu, out, fmt):
    """Expected power under the scenario's nuisance-parameter prior."""
    doc = _load(scenario)
    design = _design_values(doc, delta, clusters, cluster_size, alpha, sided, s, seed)
    delta_m = _require(design["delta_m"], "--delta")
    c_total = int(_require(design["c_total"], "--clusters"))
    n_bar = _require(design["n_bar"], "--cluster-size")
    if doc is None or any(v is not None for v in (sigma, rho, nu)):
        point = _point_from(doc, sigma, rho, nu)
        draw_set = NuisanceDrawSet.from_point(point, seed=design["seed"])
    else:
        draw_set = sample_prior(doc.prior_spec(), design["s"], design["seed"])
    est = assurance(delta_m, draw_set, c_total, n_bar, design["alpha"], design["sidedness"])
    click.echo(f"assurance {est.value:.6f}  mc stderr {est.mc_stderr:.6f}")
    click.echo(
        f"  clusters {c_total}  cluster size {n_bar:g}  "
        f"alpha {design['alpha']:g} {design['sidedness']}"
    )
    _provenance(est.seed, est.s)
    _emit(est, out, fmt)


@main.command("samplesize")
@_scenario_argument
@click.option("--target", type=float, help="Criterion level to reach.")
@click.option(
    "--direction",
    type=click.Choice(["n_bar", "clusters"]),
    help="Solve for cluster size at fixed clusters, or the reverse.",
)
@click.option(
    "--mode",
    type=click.Choice(["power", "assurance"]),
    help="Criterion: power at the prior point summary, or assurance.",
)
@click.option("--n-max", type=int, help="Cluster-size search cap.")
@click.option("--c-max", type=int, help="Cluster-count search cap.")
@_design_options
@_point_options
@_out_options
@_guard
def samplesize_cmd(scenario, target, direction, mode, n_max, c_max,
                   delta, clusters, cluster_size, alpha, sided, s, seed,
                   sigma, rho, nu, out, fmt):
    """Smallest design meeting a power or assurance target."""
    doc = _load(scenario)
    design = _design_values(doc, delta, clusters, cluster_size, alpha, sided, s, seed)
    search_doc = doc.search if doc else None
    target = _pick(target, search_doc.target if search_doc else None, 0.8)
    direction = _pick(direction, search_doc.direction if search_doc else None, "n_bar")
    mode = _pick(mode, search_doc.mode if search_doc else None, "assurance")
    delta_m = _require(design["delta_m"], "--delta")
    if any(v is not None for v in (sigma, rho, nu)) or doc is None:
        prior = _point_from(doc, sigma, rho, nu)
    elif mode == "power":
        prior = doc.point_params()
    else:
        prior = doc.prior_spec()
    common = dict(
        alpha=design["alpha"],
        sidedness=design["sidedness"],
        s=design["s"],
        seed=design["seed"],
    )
    if direction == "n_bar":
        c_total = int(_require(design["c_total"], "--clusters"))
        limit = _pick(n_max, search_doc.n_max if search_doc else None, 10_000)
        result = min_cluster_size(target, c_total, delta_m, prior, n_max=limit, **common)
    else:
        n_bar = _require(design["n_bar"], "--cluster-size")
        limit = _pick(c_max, search_doc.c_max if search_doc else None, 10_000)
        result = min_clusters(target, n_bar, delta_m, prior, c_max=limit, **common)
    if not result.feasible:
        click.echo(
            f"infeasible: target {target:g} exceeds the achievable plateau "
            f"{result.plateau:.6f}"
        )
        _provenance(result.seed, result.s)
        _emit(result, out, fmt)
        sys.exit(1)
    click.echo(f"samplesize ({result.method}, target {target:g})")
    if direction == "n_bar":
        click.echo(
            f"  clusters {result.c_total} -> cluster size {result.n_bar:g}"
            f"  (N = {result.n_total:g})"
        )
    else:
        click.echo(
            f"  cluster size {design['n_bar']:g} -> clusters {result.c_total}"
            f"  (N = {result.n_total:g})"
        )
    click.echo(f"  achieved {result.achieved:.6f}  mc stderr {result.mc_stderr:.6f}")
    _provenance(result.seed, result.s)
    _emit(result, out, fmt)


@main.command("curve")
@_scenario_argument
@click.option("--n-bar", "n_bar_range", help="Cluster-size grid, list or start:stop:step.")
@click.option(
    "--mode",
    type=click.Choice(["power", "assurance"]),
    help="Criterion: power at the prior point summary, or assurance.",
)
@_design_options
@_point_options
@_out_options
@_guard
def curve_cmd(scenario, n_bar_range, mode, delta, clusters, cluster_size, alpha, sided,
              s, seed, sigma, rho, nu, out, fmt):
    """Criterion as a function of mean cluster size at fixed clusters."""
    doc = _load(scenario)
    design = _design_values(doc, delta, clusters, cluster_size, alpha, sided, s, seed)
    delta_m = _require(design["delta_m"], "--delta")
    c_total = int(_require(design["c_total"], "--clusters"))
    mode = _pick(mode, doc.search.mode if doc else None, "assurance")
    doc_range = doc.search.ranges.n_bar_values() if doc else None
    grid = cio.parse_range(n_bar_range) if n_bar_range else _require(doc_range, "--n-bar")
    if any(v is not None for v in (sigma, rho, nu)) or doc is None:
        prior = _point_from(doc, sigma, rho, nu)
        digest = point_digest(prior)
    elif mode == "power":
        prior = doc.point_params()
        digest = point_digest(prior)
    else:
        prior = doc.prior_spec()
        digest = prior_digest(prior)
    points = criterion_curve(
        delta_m, prior, c_total, grid,
        alpha=design["alpha"], sidedness=design["sidedness"],
        s=design["s"], seed=design["seed"],
    )
    method = "power" if isinstance(prior, NuisanceParams) else "assurance"
    click.echo(f"{'n_bar':>8}  {'value':>10}  {'stderr':>10}")
    for p in points:
        click.echo(f"{p.n_bar:8g}  {p.value:10.6f}  {p.mc_stderr:10.6f}")
    effective_s = 1 if method == "power" else design["s"]
    _provenance(design["seed"], effective_s)
    _emit(
        cio.CurveResult(
            delta_m=delta_m,
            c_total=c_total,
            alpha=design["alpha"],
            sidedness=design["sidedness"],
            method=method,
            points=points,
            s=effective_s,
            seed=design["seed"],
            spec_digest=digest,
        ),
        out,
        fmt,
    )


@main.command("nu-sweep")
@_scenario_argument
@click.option("--nu", "nu_range", help="CV grid, list or start:stop:step (e.g. 0:1:0.1).")
@click.option("--n-bar", "n_bar_range", help="Cluster-size grid, list or start:stop:step.")
@_design_options
@click.option("--sigma", type=float, help="Total outcome SD (point).")
@click.option("--rho", type=float, help="Intracluster correlation (point).")
@_out_options
@_guard
def nu_sweep_cmd(scenario, nu_range, n_bar_range, delta, clusters, cluster_size, alpha,
                 sided, s, seed, sigma, rho, out, fmt):
    """Assurance curves across cluster-size CV values, shared draws."""
    doc = _load(scenario)
    design = _design_values(doc, delta, clusters, cluster_size, alpha, sided, s, seed)
    delta_m = _require(design["delta_m"], "--delta")
    c_total = int(_require(design["c_total"], "--clusters"))
    doc_nu = doc.search.ranges.nu_values() if doc else None
    doc_n = doc.search.ranges.n_bar_values() if doc else None
    nu_values = cio.parse_range(nu_range) if nu_range else _require(doc_nu, "--nu")
    grid = cio.parse_range(n_bar_range) if n_bar_range else _require(doc_n, "--n-bar")
    if rho is not None:
        rho_prior = rho
    elif doc is not None:
        spec = doc.prior_spec()
        if not hasattr(spec.joint, "rho"):
            raise click.UsageError("nu-sweep needs an explicit rho marginal or --rho")
        rho_prior = spec.joint.rho
    else:
        raise click.UsageError("--rho is required (flag or scenario file)")
    if sigma is None:
        point = doc.point_params() if doc else None
        sigma = _require(point.sigma if point else None, "--sigma")
    curves = nu_sweep(
        delta_m, rho_prior, sigma, nu_values, c_total, grid,
        alpha=design["alpha"], sidedness=design["sidedness"],
        s=design["s"], seed=design["seed"],
    )
    click.echo(f"{'nu':>6}  {'n_bar':>8}  {'value':>10}  {'stderr':>10}")
    for sweep in curves:
        for p in sweep.points:
            click.echo(f"{sweep.nu:6g}  {p.n_bar:8g}  {p.value:10.6f}  {p.mc_stderr:10.6f}")
    _provenance(design["seed"], design["s"])
    digest_doc = {
        "rho": rho_prior if isinstance(rho_prior, float) else rho_prior.to_dict(),
        "sigma": sigma,
        "nu_values": list(nu_values),
    }
    _emit(
        cio.SweepResult(
            delta_m=delta_m,
            c_total=c_total,
            alpha=design["alpha"],
            sidedness=design["sidedness"],
            curves=curves,
            s=design["s"],
            seed=design["seed"],
            spec_digest=canonical_digest(digest_doc),
        ),
        out,
        fmt,
    )


@main.command("compare-priors")
@click.argument("scenario", required=True)
@click.option("--targets", help="Comma-separated criterion targets.")
@click.option("--clusters", "clusters_csv", help="Comma-separated cluster counts.")
@_out_options
@click.option("--draws", "-S", "s", type=int, help="Monte Carlo draw count.")
@click.option("--seed", type=int, help="Seed for the draw sets.")
@_guard
def compare_priors_cmd(scenario, targets, clusters_csv, out, fmt, s, seed):
    """Sample-size grid for each labelled prior, power next to assurance."""
    doc = _load(scenario)
    design = doc.design
    target_values = (
        [float(t) for t in targets.split(",")]
        if targets
        else (doc.search.targets or [doc.search.target])
    )
    c_values = (
        [int(c) for c in clusters_csv.split(",")]
        if clusters_csv
        else (doc.search.clusters or ([design.clusters] if design.clusters else None))
    )
    c_values = _require(c_values, "--clusters")
    scenarios = doc.labeled_priors()
    s_eff = _pick(s, design.s)
    seed_eff = _pick(seed, design.seed)
    rows = prior_comparison(
        scenarios, design.delta_m, target_values, c_values,
        alpha=design.alpha, sidedness=design.sidedness, s=s_eff, seed=seed_eff,
    )
    click.echo(
        f"{'scenario':<12} {'C':>4} {'method':<10} {'target':>6} "
        f"{'n_bar':>6} {'N':>7} {'achieved':>9}"
    )
    for r in rows:
        if r.feasible:
            click.echo(
                f"{r.scenario_label:<12} {r.c_total:>4} {r.method:<10} {r.target:>6g} "
                f"{r.n_bar:>6g} {r.n_total:>7g} {r.achieved:>9.4f}"
            )
        else:
            click.echo(
                f"{r.scenario_label:<12} {r.c_total:>4} {r.method:<10} {r.target:>6g} "
                f"{'-':>6} {'-':>7} {'-':>9}"
            )
    _provenance(seed_eff, s_eff)
    _emit(
        cio.ComparisonResult(
            delta_m=design.delta_m,
            alpha=design.alpha,
            sidedness=design.sidedness,
            targets=target_values,
            c_values=c_values,
            rows=rows,
            s=s_eff,
            seed=seed_eff,
            spec_digest=cio.comparison_digest(scenarios),
        ),
        out,
        fmt,
    )


@main.command("validate")
@_scenario_argument
@click.option("--reps", type=int, help="Simulated trials per check.")
@click.option("--delta-true", type=float, help="True effect in the simulator.")
@click.option("--intercept", type=float, help="Baseline outcome mean.")
@_design_options
@_point_options
@_out_options
@_guard
def validate_cmd(scenario, reps, delta_true, intercept, delta, clusters, cluster_size,
                 alpha, sided, s, seed, sigma, rho, nu, out, fmt):
    """Check the closed-form power against a trial-level simulator."""
    doc = _load(scenario)
    design = _design_values(doc, delta, clusters, cluster_size, alpha, sided, s, seed)
    psi = _point_from(doc, sigma, rho, nu)
    delta_m = _require(design["delta_m"], "--delta")
    c_total = int(_require(design["c_total"], "--clusters"))
    n_bar = _require(design["n_bar"], "--cluster-size")
    if n_bar != int(n_bar):
        raise click.UsageError("the simulator needs an integer --cluster-size")
    sim = doc.sim if doc else None
    reps = _pick(reps, sim.reps if sim else None, 10_000)
    truth = _pick(delta_true, sim.delta_true if sim else None, delta_m)
    intercept = _pick(intercept, sim.intercept if sim else None, 0.0)
    config = TrialSimConfig(
        delta_true=truth,
        sigma_b_sq=psi.sigma_b_sq,
        sigma_w_sq=psi.sigma_w_sq,
        c_total=c_total,
        n_bar=int(n_bar),
        nu=psi.nu,
        intercept=intercept,
        reps=reps,
        alpha=design["alpha"],
        sidedness=design["sidedness"],
        seed=design["seed"],
    )
    empirical, stderr = empirical_power(config)
    formula = power(truth, psi, c_total, int(n_bar), design["alpha"], design["sidedness"])
    gap = abs(empirical - formula)
    click.echo("simulator check")
    click.echo(f"  empirical {empirical:.6f}  stderr {stderr:.6f}")
    click.echo(f"  formula   {formula:.6f}  |diff| {gap:.6f}")
    click.echo(f"seed {design['seed']}  S {reps}")
    _emit(
        cio.ValidationReport(
            delta_m=delta_m,
            sigma=psi.sigma,
            rho=psi.rho,
            nu=psi.nu,
            c_total=c_total,
            n_bar=int(n_bar),
            alpha=design["alpha"],
            sidedness=design["sidedness"],
            reps=reps,
            seed=design["seed"],
            empirical=empirical,
            stderr=stderr,
            formula=formula,
            abs_error=gap,
        ),
        out,
        fmt,
    )


@main.command("serve")
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True, type=int)
@click.option("--cors", help="Comma-separated allowed origins.")
@_guard
def serve_cmd(host, port, cors):
    """Run the HTTP JSON API."""
    try:
        import uvicorn
    except ImportError as exc:
        raise click.UsageError(f"uvicorn is required for serve: {exc}")
    from .service import create_app

    origins = cors.split(",") if cors else None
    uvicorn.run(create_app(cors_origins=origins), host=host, port=port)


if __name__ == "__main__":
    main()
