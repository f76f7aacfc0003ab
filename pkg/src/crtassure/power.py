"""Closed-form power for the two-arm parallel-group cluster randomised design.

The treatment effect is estimated as the difference of individual-level arm
means under a 1:1 allocation of C clusters with mean cluster size n_bar.
Cluster-size imbalance enters through the coefficient of variation nu, and
between-cluster correlation through the ICC rho, giving

    Var(effect) = 4 * sigma^2 * DE / (C * n_bar),
    DE          = 1 + ((nu^2 + 1) * n_bar - 1) * rho.

Power of the one- or two-sided Wald test follows by a normal approximation.
With nu = 0 the design effect reduces to the textbook 1 + (n_bar - 1) * rho,
and with rho = 0, nu = 0 the power matches the standard two-sample formula
for N = C * n_bar individuals.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .distributions import standard_normal_cdf, standard_normal_quantile

__all__ = [
    "ONE_SIDED",
    "TWO_SIDED",
    "SIDEDNESS_VALUES",
    "DEFAULT_S",
    "DEFAULT_SEED",
    "NuisanceParams",
    "DesignConfig",
    "critical_z",
    "design_effect",
    "power",
    "power_array",
    "power_limit",
    "power_limit_array",
]

ONE_SIDED = "one-sided"
TWO_SIDED = "two-sided"
SIDEDNESS_VALUES = (ONE_SIDED, TWO_SIDED)

DEFAULT_S = 10_000
DEFAULT_SEED = 1729


@dataclass(frozen=True)
class NuisanceParams:
    """Nuisance parameters: total SD sigma, ICC rho, cluster-size CV nu.

    sigma^2 is the total outcome variance sigma_b^2 + sigma_w^2 and
    rho = sigma_b^2 / sigma^2, so sigma > 0, 0 <= rho < 1 and nu >= 0.
    """

    sigma: float
    rho: float
    nu: float

    def __post_init__(self) -> None:
        if not (self.sigma > 0 and math.isfinite(self.sigma)):
            raise ValueError(f"sigma must be > 0, got {self.sigma}")
        if not (0.0 <= self.rho < 1.0):
            raise ValueError(f"rho must lie in [0, 1), got {self.rho}")
        if not (self.nu >= 0 and math.isfinite(self.nu)):
            raise ValueError(f"nu must be >= 0, got {self.nu}")

    @property
    def sigma_b_sq(self) -> float:
        return self.rho * self.sigma**2

    @property
    def sigma_w_sq(self) -> float:
        return (1.0 - self.rho) * self.sigma**2


@dataclass(frozen=True)
class DesignConfig:
    """Fixed design quantities shared by power and assurance runs."""

    delta_m: float
    alpha: float = 0.05
    sidedness: str = TWO_SIDED
    c_total: int = 2
    s: int = DEFAULT_S
    seed: int = DEFAULT_SEED

    def __post_init__(self) -> None:
        if not (self.delta_m > 0 and math.isfinite(self.delta_m)):
            raise ValueError(f"delta_m must be > 0, got {self.delta_m}")
        _check_alpha(self.alpha)
        _check_sidedness(self.sidedness)
        _check_clusters(self.c_total)
        if self.s < 1:
            raise ValueError(f"draw count s must be >= 1, got {self.s}")


def _check_alpha(alpha: float) -> None:
    if not (0.0 < alpha < 1.0):
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")


def _check_sidedness(sidedness: str) -> None:
    if sidedness not in SIDEDNESS_VALUES:
        raise ValueError(f"sidedness must be one of {SIDEDNESS_VALUES}, got {sidedness!r}")


def _check_clusters(c_total: int) -> None:
    if c_total < 2 or c_total % 2 != 0:
        raise ValueError(f"c_total must be an even count >= 2, got {c_total}")


def _check_n_bar(n_bar: float) -> None:
    if not (n_bar >= 1 and math.isfinite(n_bar)):
        raise ValueError(f"n_bar must be >= 1, got {n_bar}")


def critical_z(alpha: float, sidedness: str) -> float:
    """Wald critical value: z_{1-alpha} one-sided, z_{1-alpha/2} two-sided."""
    _check_alpha(alpha)
    _check_sidedness(sidedness)
    tail = alpha if sidedness == ONE_SIDED else alpha / 2.0
    return float(standard_normal_quantile(1.0 - tail))


def design_effect(n_bar, rho, nu):
    """Variance inflation relative to an individually randomised design."""
    return 1.0 + ((np.asarray(nu) ** 2 + 1.0) * np.asarray(n_bar) - 1.0) * np.asarray(rho)


def power_array(delta, sigma, rho, nu, c_total: int, n_bar, alpha: float, sidedness: str):
    """Vectorised power; inputs broadcast, validation left to callers."""
    sigma = np.asarray(sigma, dtype=float)
    de = design_effect(n_bar, rho, nu)
    se = np.sqrt(4.0 * sigma**2 * de / (c_total * np.asarray(n_bar, dtype=float)))
    return standard_normal_cdf(np.asarray(delta) / se - critical_z(alpha, sidedness))


def power(
    delta: float,
    psi: NuisanceParams,
    c_total: int,
    n_bar: float,
    alpha: float = 0.05,
    sidedness: str = TWO_SIDED,
) -> float:
    """Probability of rejecting the null in favour of delta > 0.

    Parameters
    ----------
    delta : true difference in means (delta = 0 recovers the one-sided
        test size alpha; the two-sided formula counts upper-tail
        rejections only, standard for a positive MCID).
    psi : nuisance parameters (sigma, rho, nu).
    c_total : total number of clusters, even, split 1:1.
    n_bar : mean cluster size, any real >= 1.
    alpha, sidedness : significance level and tail convention.
    """
    _check_clusters(c_total)
    _check_n_bar(n_bar)
    return float(power_array(delta, psi.sigma, psi.rho, psi.nu, c_total, n_bar, alpha, sidedness))


def power_limit_array(delta, sigma, rho, nu, c_total: int, alpha: float, sidedness: str):
    """Vectorised plateau of power as n_bar grows without bound.

    For rho > 0 the standard error tends to a positive constant and the
    limit is Phi(delta * sqrt(C / (4 sigma^2 (nu^2+1) rho)) - z). For rho = 0
    it collapses to 1, alpha-ish, or 0 according to the sign of delta.
    """
    delta = np.asarray(delta, dtype=float)
    sigma = np.asarray(sigma, dtype=float)
    rho = np.asarray(rho, dtype=float)
    nu = np.asarray(nu, dtype=float)
    z = critical_z(alpha, sidedness)
    safe_rho = np.where(rho > 0, rho, 1.0)
    se_inf = np.sqrt(4.0 * sigma**2 * (nu**2 + 1.0) * safe_rho / c_total)
    limited = standard_normal_cdf(delta / se_inf - z)
    degenerate = np.where(delta > 0, 1.0, np.where(delta < 0, 0.0, standard_normal_cdf(-z)))
    out = np.where(rho > 0, limited, degenerate)
    return out if out.ndim else float(out)


def power_limit(
    delta: float,
    psi: NuisanceParams,
    c_total: int,
    alpha: float = 0.05,
    sidedness: str = TWO_SIDED,
) -> float:
    """Supremum of achievable power at fixed C: the n_bar -> infinity plateau.

    Enlarging clusters cannot buy arbitrary power when rho > 0; only more
    clusters can. Feasibility checks in the search routines rest on this.
    """
    _check_clusters(c_total)
    return float(
        power_limit_array(delta, psi.sigma, psi.rho, psi.nu, c_total, alpha, sidedness)
    )
