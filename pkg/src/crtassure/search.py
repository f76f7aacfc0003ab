"""Minimal-design searches, curves and sensitivity sweeps.

Every search materialises exactly one draw set and evaluates all candidate
designs against it. Under such common random numbers the estimated criterion
is strictly increasing in n_bar and in C, so exponential bracketing plus
integer binary search returns the true minimal design for the draw set, and
rerunning with the same seed reproduces it bit for bit.

A point nuisance vector runs the same machinery over a singleton draw set,
which the assurance short-circuit reduces to closed-form power. The two
"methods" reported downstream are therefore a single code path.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence, Union

from .assurance import AssuranceEstimate, assurance, assurance_limit
from .power import (
    DEFAULT_S,
    DEFAULT_SEED,
    TWO_SIDED,
    NuisanceParams,
    _check_clusters,
)
from .priors import (
    IndependentJointSpec,
    MarginalPrior,
    NuisanceDrawSet,
    PriorSpec,
    marginal_medians,
    sample_prior,
)

__all__ = [
    "METHOD_ASSURANCE",
    "METHOD_POWER",
    "CurvePoint",
    "SampleSizeResult",
    "SearchBudgetError",
    "SensitivityRow",
    "SweepCurve",
    "curve",
    "min_cluster_size",
    "min_clusters",
    "nu_sweep",
    "prior_comparison",
]

METHOD_POWER = "power"
METHOD_ASSURANCE = "assurance"

DEFAULT_N_MAX = 10_000
DEFAULT_C_MAX = 10_000

PriorOrPoint = Union[PriorSpec, NuisanceParams]


class SearchBudgetError(RuntimeError):
    """Target is reachable in principle but not within the search budget.

    Raised only when the plateau check says the target can be met, so the
    caller should raise n_max (or c_max), unlike the infeasible case where
    no budget would help.
    """


@dataclass(frozen=True)
class SampleSizeResult:
    """Outcome of a minimal-design search along one axis.

    For infeasible searches the searched quantity, achieved value and
    n_total are None. ``plateau`` is the supremum of the criterion along
    the searched axis: the large-n_bar limit when n_bar is searched, and
    1.0 when C is searched (power tends to one as clusters accumulate).
    """

    method: str
    target: float
    c_total: int
    n_bar: Optional[float]
    n_total: Optional[float]
    achieved: Optional[float]
    mc_stderr: float
    feasible: bool
    plateau: float
    s: int
    seed: int
    spec_digest: str


@dataclass(frozen=True)
class CurvePoint:
    """One design on a power or assurance curve."""

    n_bar: float
    value: float
    mc_stderr: float


@dataclass(frozen=True)
class SweepCurve:
    """A labelled curve from a cluster-size-variability sweep."""

    nu: float
    points: list[CurvePoint]


@dataclass(frozen=True)
class SensitivityRow:
    """One cell of the prior-sensitivity grid (scenario x C x target x method)."""

    scenario_label: str
    method: str
    target: float
    c_total: int
    n_bar: Optional[float]
    n_total: Optional[float]
    achieved: Optional[float]
    mc_stderr: float
    feasible: bool


def _materialise(prior: PriorOrPoint, s: int, seed: int) -> tuple[NuisanceDrawSet, str]:
    """Turn the prior argument into the search's single draw set."""
    if isinstance(prior, NuisanceParams):
        return NuisanceDrawSet.from_point(prior, seed=seed), METHOD_POWER
    if isinstance(prior, PriorSpec):
        return sample_prior(prior, s, seed), METHOD_ASSURANCE
    raise TypeError(f"expected PriorSpec or NuisanceParams, got {type(prior).__name__}")


def _check_target(target: float) -> None:
    if not (0.0 < target < 1.0):
        raise ValueError(f"target must lie strictly in (0, 1), got {target}")


def _as_total(c_total: int, n_bar: float) -> float:
    total = c_total * n_bar
    return int(total) if float(total).is_integer() else total


def min_cluster_size(
    target: float,
    c_total: int,
    delta_m: float,
    prior: PriorOrPoint,
    alpha: float = 0.05,
    sidedness: str = TWO_SIDED,
    s: int = DEFAULT_S,
    seed: int = DEFAULT_SEED,
    n_max: int = DEFAULT_N_MAX,
) -> SampleSizeResult:
    """Smallest integer n_bar in [1, n_max] meeting the target at fixed C.

    The plateau is checked first: if even infinitely large clusters cannot
    reach the target at this C the result is returned infeasible without
    iterating. A reachable target that still exceeds n_max raises
    SearchBudgetError instead, telling the caller to raise n_max rather
    than add clusters.
    """
    _check_target(target)
    _check_clusters(c_total)
    if n_max < 1:
        raise ValueError(f"n_max must be >= 1, got {n_max}")
    draws, method = _materialise(prior, s, seed)
    plateau = assurance_limit(delta_m, draws, c_total, alpha, sidedness)
    base = dict(
        method=method,
        target=target,
        c_total=c_total,
        plateau=plateau,
        s=draws.s,
        seed=draws.seed,
        spec_digest=draws.spec_digest,
    )
    if plateau <= target:
        return SampleSizeResult(
            n_bar=None,
            n_total=None,
            achieved=None,
            mc_stderr=0.0,
            feasible=False,
            **base,
        )

    cache: dict[int, AssuranceEstimate] = {}

    def eval_at(n_bar: int) -> AssuranceEstimate:
        if n_bar not in cache:
            cache[n_bar] = assurance(delta_m, draws, c_total, n_bar, alpha, sidedness)
        return cache[n_bar]

    if eval_at(1).value >= target:
        hit = 1
    else:
        lo, hi = 1, 2
        while True:
            hi = min(hi, n_max)
            if eval_at(hi).value >= target:
                break
            if hi == n_max:
                raise SearchBudgetError(
                    f"target {target} needs n_bar > n_max={n_max} at C={c_total} "
                    f"(plateau {plateau:.6g} clears the target); increase n_max"
                )
            lo, hi = hi, hi * 2
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if eval_at(mid).value >= target:
                hi = mid
            else:
                lo = mid
        hit = hi
    est = eval_at(hit)
    return SampleSizeResult(
        n_bar=hit,
        n_total=_as_total(c_total, hit),
        achieved=est.value,
        mc_stderr=est.mc_stderr,
        feasible=True,
        **base,
    )


def min_clusters(
    target: float,
    n_bar: float,
    delta_m: float,
    prior: PriorOrPoint,
    alpha: float = 0.05,
    sidedness: str = TWO_SIDED,
    s: int = DEFAULT_S,
    seed: int = DEFAULT_SEED,
    c_max: int = DEFAULT_C_MAX,
) -> SampleSizeResult:
    """Smallest even C meeting the target at fixed n_bar.

    The criterion tends to one as C grows, so every target is reachable
    eventually; the only failure mode is exhausting c_max.
    """
    _check_target(target)
    if not (n_bar >= 1 and math.isfinite(n_bar)):
        raise ValueError(f"n_bar must be >= 1, got {n_bar}")
    _check_clusters(c_max)
    draws, method = _materialise(prior, s, seed)

    cache: dict[int, AssuranceEstimate] = {}

    def eval_at(c_total: int) -> AssuranceEstimate:
        if c_total not in cache:
            cache[c_total] = assurance(delta_m, draws, c_total, n_bar, alpha, sidedness)
        return cache[c_total]

    if eval_at(2).value >= target:
        hit = 2
    else:
        # bracket and bisect over k = C/2 to keep every probe even
        k_max = c_max // 2
        lo, hi = 1, 2
        while True:
            hi = min(hi, k_max)
            if eval_at(2 * hi).value >= target:
                break
            if hi == k_max:
                raise SearchBudgetError(
                    f"target {target} needs C > c_max={c_max} at n_bar={n_bar}; "
                    "increase c_max"
                )
            lo, hi = hi, hi * 2
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if eval_at(2 * mid).value >= target:
                hi = mid
            else:
                lo = mid
        hit = 2 * hi
    est = eval_at(hit)
    return SampleSizeResult(
        method=method,
        target=target,
        c_total=hit,
        n_bar=float(n_bar) if not float(n_bar).is_integer() else int(n_bar),
        n_total=_as_total(hit, n_bar),
        achieved=est.value,
        mc_stderr=est.mc_stderr,
        feasible=True,
        plateau=1.0,
        s=draws.s,
        seed=draws.seed,
        spec_digest=draws.spec_digest,
    )


def curve(
    delta_m: float,
    prior: PriorOrPoint,
    c_total: int,
    n_range: Sequence[float],
    alpha: float = 0.05,
    sidedness: str = TWO_SIDED,
    s: int = DEFAULT_S,
    seed: int = DEFAULT_SEED,
) -> list[CurvePoint]:
    """Evaluate the criterion over a grid of cluster sizes on one draw set."""
    if len(n_range) == 0:
        raise ValueError("n_range must be non-empty")
    draws, _ = _materialise(prior, s, seed)
    points = []
    for n_bar in n_range:
        est = assurance(delta_m, draws, c_total, n_bar, alpha, sidedness)
        points.append(CurvePoint(n_bar=float(n_bar), value=est.value, mc_stderr=est.mc_stderr))
    return points


def nu_sweep(
    delta_m: float,
    rho_prior: Union[MarginalPrior, float],
    sigma: float,
    nu_values: Sequence[float],
    c_total: int,
    n_range: Sequence[float],
    alpha: float = 0.05,
    sidedness: str = TWO_SIDED,
    s: int = DEFAULT_S,
    seed: int = DEFAULT_SEED,
) -> list[SweepCurve]:
    """One curve per nu value, all sharing the same (sigma, rho) draws.

    The rho stream is seeded independently of the nu marginal, so swapping
    the nu point between curves leaves the ICC draws untouched; curves then
    differ only through the design effect and are pointwise ordered in nu.
    """
    if len(nu_values) == 0:
        raise ValueError("nu_values must be non-empty")
    for nu in nu_values:
        if not (nu >= 0 and math.isfinite(nu)):
            raise ValueError(f"nu values must be finite and >= 0, got {nu}")
    rho_marginal = (
        rho_prior if isinstance(rho_prior, MarginalPrior) else MarginalPrior.point(float(rho_prior))
    )
    curves = []
    for nu in nu_values:
        spec = PriorSpec(
            joint=IndependentJointSpec(rho=rho_marginal, sigma=MarginalPrior.point(float(sigma))),
            nu=MarginalPrior.point(float(nu)),
        )
        points = curve(delta_m, spec, c_total, n_range, alpha, sidedness, s, seed)
        curves.append(SweepCurve(nu=float(nu), points=points))
    return curves


def _row(label: str, result: SampleSizeResult) -> SensitivityRow:
    return SensitivityRow(
        scenario_label=label,
        method=result.method,
        target=result.target,
        c_total=result.c_total,
        n_bar=result.n_bar,
        n_total=result.n_total,
        achieved=result.achieved,
        mc_stderr=result.mc_stderr,
        feasible=result.feasible,
    )


def prior_comparison(
    scenarios: Sequence[tuple[str, PriorOrPoint]],
    delta_m: float,
    targets: Sequence[float],
    c_values: Sequence[int],
    alpha: float = 0.05,
    sidedness: str = TWO_SIDED,
    s: int = DEFAULT_S,
    seed: int = DEFAULT_SEED,
) -> list[SensitivityRow]:
    """Sample-size grid comparing ICC scenarios under power and assurance.

    For each scenario the power row searches at the prior's marginal
    medians (a property of the prior, so it is independent of the search
    seed), and the assurance row searches over draws from the full prior.
    Scenarios given directly as points yield identical rows for the two
    methods.
    """
    if len(scenarios) == 0:
        raise ValueError("scenarios must be non-empty")
    for target in targets:
        _check_target(target)
    rows = []
    for label, prior in scenarios:
        if isinstance(prior, NuisanceParams):
            point, spec = prior, PriorSpec.from_point(prior)
        else:
            point, spec = marginal_medians(prior), prior
        for c_total in c_values:
            for target in targets:
                rows.append(
                    _row(
                        label,
                        min_cluster_size(
                            target, c_total, delta_m, point, alpha, sidedness, s, seed
                        ),
                    )
                )
                rows.append(
                    _row(
                        label,
                        min_cluster_size(
                            target, c_total, delta_m, spec, alpha, sidedness, s, seed
                        ),
                    )
                )
    return rows
