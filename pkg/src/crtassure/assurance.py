"""Bayesian assurance: power averaged over a prior on the nuisance vector.

Assurance fixes the effect at the minimum clinically important difference
delta_m and integrates the closed-form power over uncertainty in
(sigma, rho, nu) only. The integral is estimated by plain Monte Carlo on a
materialised draw set,

    A(n_bar) ~= (1/S) * sum_j P(n_bar | delta_m, psi_j),

with the standard error of the mean reported alongside. Evaluating one draw
set at many designs (common random numbers) makes the estimate strictly
monotone in n_bar and C wherever the underlying power is, which the search
module relies on.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .power import TWO_SIDED, _check_clusters, power_array, power_limit_array
from .priors import NuisanceDrawSet

__all__ = ["AssuranceEstimate", "assurance", "assurance_limit"]


@dataclass(frozen=True)
class AssuranceEstimate:
    """Monte Carlo assurance value with its standard error and provenance."""

    value: float
    mc_stderr: float
    s: int
    c_total: int
    n_bar: float
    seed: int
    spec_digest: str


def assurance(
    delta_m: float,
    draws: NuisanceDrawSet,
    c_total: int,
    n_bar: float,
    alpha: float = 0.05,
    sidedness: str = TWO_SIDED,
) -> AssuranceEstimate:
    """Estimate assurance at a single design (c_total, n_bar).

    The per-draw powers are averaged; mc_stderr is their sample standard
    deviation divided by sqrt(S). A degenerate draw set (all powers equal,
    as with an all-point-mass prior) short-circuits to the common value, so
    assurance at a point prior reproduces closed-form power exactly rather
    than up to summation rounding.
    """
    if not (delta_m > 0 and math.isfinite(delta_m)):
        raise ValueError(f"delta_m must be > 0, got {delta_m}")
    if not (n_bar >= 1 and math.isfinite(n_bar)):
        raise ValueError(f"n_bar must be >= 1, got {n_bar}")
    _check_clusters(c_total)
    powers = np.asarray(
        power_array(delta_m, draws.sigma, draws.rho, draws.nu, c_total, n_bar, alpha, sidedness)
    )
    lo, hi = float(powers.min()), float(powers.max())
    if lo == hi:
        value, stderr = lo, 0.0
    else:
        value = float(powers.mean())
        stderr = float(powers.std(ddof=1) / math.sqrt(powers.size))
    return AssuranceEstimate(
        value=value,
        mc_stderr=stderr,
        s=draws.s,
        c_total=c_total,
        n_bar=n_bar,
        seed=draws.seed,
        spec_digest=draws.spec_digest,
    )


def assurance_limit(
    delta_m: float,
    draws: NuisanceDrawSet,
    c_total: int,
    alpha: float = 0.05,
    sidedness: str = TWO_SIDED,
) -> float:
    """Plateau of assurance as n_bar grows at fixed C.

    The per-draw power limits are averaged over the same draw set. Any
    prior mass on rho > 0 caps the achievable assurance below 1; searches
    test feasibility against this value before iterating.
    """
    if not (delta_m > 0 and math.isfinite(delta_m)):
        raise ValueError(f"delta_m must be > 0, got {delta_m}")
    _check_clusters(c_total)
    limits = np.asarray(
        power_limit_array(delta_m, draws.sigma, draws.rho, draws.nu, c_total, alpha, sidedness)
    )
    lo, hi = float(limits.min()), float(limits.max())
    if lo == hi:
        return lo
    return float(limits.mean())
