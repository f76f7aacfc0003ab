"""Mixed-model trial simulator used to validate the closed-form power.

Data are generated from the two-level model

    Y_ij = intercept + X_j * delta_true + c_j + e_ij,

with cluster effects c_j ~ N(0, sigma_b_sq) and residuals
e_ij ~ N(0, sigma_w_sq), half the clusters on treatment. The test statistic
divides the difference in arm means by the closed-form standard error
evaluated at the true parameters (known-variance Wald test), so empirical
rejection rates check the power formula itself, including its
unequal-cluster-size approximation, rather than any estimator's behaviour.

Cluster sizes follow a rounded gamma law with mean n_bar and standard
deviation nu * n_bar, floored at 1. Rounding bias is negligible for the
cluster sizes used here (the CV of round(Gamma) at n_bar=12, nu=0.49 is
0.4906) but severe near n_bar = 1, where the realised-moment check below
is unattainable by design.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .power import (
    DEFAULT_SEED,
    ONE_SIDED,
    TWO_SIDED,
    _check_alpha,
    _check_clusters,
    _check_sidedness,
    critical_z,
    design_effect,
)

__all__ = [
    "TrialSimConfig",
    "draw_cluster_sizes",
    "empirical_power",
    "simulate_z",
]

# realised mean and CV must land within 5% of target when C is large enough
# for the check to be meaningful; a bounded number of redraws keeps failure
# probability negligible away from the rounding-dominated corner
SIZE_CHECK_MIN_CLUSTERS = 40
SIZE_CHECK_REL_TOL = 0.05
MAX_SIZE_RETRIES = 100


@dataclass(frozen=True)
class TrialSimConfig:
    """One simulated-trial scenario with its analysis settings."""

    delta_true: float
    sigma_b_sq: float
    sigma_w_sq: float
    c_total: int
    n_bar: int
    nu: float = 0.0
    intercept: float = 0.0
    reps: int = 10_000
    alpha: float = 0.05
    sidedness: str = TWO_SIDED
    seed: int = DEFAULT_SEED

    def __post_init__(self) -> None:
        if not (math.isfinite(self.delta_true) and math.isfinite(self.intercept)):
            raise ValueError("delta_true and intercept must be finite")
        if not (self.sigma_b_sq >= 0 and math.isfinite(self.sigma_b_sq)):
            raise ValueError(f"sigma_b_sq must be >= 0, got {self.sigma_b_sq}")
        if not (self.sigma_w_sq > 0 and math.isfinite(self.sigma_w_sq)):
            raise ValueError(f"sigma_w_sq must be > 0, got {self.sigma_w_sq}")
        _check_clusters(self.c_total)
        if not (isinstance(self.n_bar, int) and self.n_bar >= 1):
            raise ValueError(f"n_bar must be an integer >= 1, got {self.n_bar}")
        if not (self.nu >= 0 and math.isfinite(self.nu)):
            raise ValueError(f"nu must be >= 0, got {self.nu}")
        if self.reps < 1:
            raise ValueError(f"reps must be >= 1, got {self.reps}")
        _check_alpha(self.alpha)
        _check_sidedness(self.sidedness)

    @property
    def total_variance(self) -> float:
        return self.sigma_b_sq + self.sigma_w_sq

    @property
    def sigma(self) -> float:
        return math.sqrt(self.total_variance)

    @property
    def rho(self) -> float:
        return self.sigma_b_sq / self.total_variance

    @property
    def wald_se(self) -> float:
        """Closed-form standard error of the arm-mean difference."""
        de = design_effect(self.n_bar, self.rho, self.nu)
        return math.sqrt(4.0 * self.total_variance * de / (self.c_total * self.n_bar))


def _draw_sizes(n_bar: int, nu: float, c_total: int, rng: np.random.Generator) -> np.ndarray:
    if nu == 0.0:
        return np.full(c_total, n_bar, dtype=np.int64)
    shape = 1.0 / nu**2
    scale = n_bar / shape
    check = c_total >= SIZE_CHECK_MIN_CLUSTERS
    for _ in range(MAX_SIZE_RETRIES):
        sizes = np.maximum(np.rint(rng.gamma(shape, scale, c_total)), 1.0).astype(np.int64)
        if not check:
            return sizes
        mean = sizes.mean()
        cv = sizes.std(ddof=1) / mean
        if abs(mean - n_bar) <= SIZE_CHECK_REL_TOL * n_bar and abs(cv - nu) <= SIZE_CHECK_REL_TOL * nu:
            return sizes
    raise RuntimeError(
        f"could not realise cluster sizes with mean {n_bar} and cv {nu} within "
        f"{SIZE_CHECK_REL_TOL:.0%} after {MAX_SIZE_RETRIES} redraws; integer "
        "rounding biases the moments too strongly at this n_bar"
    )


def draw_cluster_sizes(n_bar: int, nu: float, c_total: int, seed: int) -> list[int]:
    """Draw per-cluster sizes from the rounded gamma law (all n_bar if nu=0)."""
    if not (isinstance(n_bar, int) and n_bar >= 1):
        raise ValueError(f"n_bar must be an integer >= 1, got {n_bar}")
    if not (nu >= 0 and math.isfinite(nu)):
        raise ValueError(f"nu must be >= 0, got {nu}")
    if c_total < 1:
        raise ValueError(f"c_total must be >= 1, got {c_total}")
    rng = np.random.Generator(np.random.PCG64(seed))
    return [int(v) for v in _draw_sizes(n_bar, nu, c_total, rng)]


def _simulate_z(config: TrialSimConfig, sizes: np.ndarray, rng: np.random.Generator) -> float:
    c_effects = rng.normal(0.0, math.sqrt(config.sigma_b_sq), config.c_total)
    total = int(sizes.sum())
    residuals = rng.normal(0.0, math.sqrt(config.sigma_w_sq), total)
    half = config.c_total // 2
    treated = np.repeat(np.arange(config.c_total) < half, sizes)
    y = (
        config.intercept
        + config.delta_true * treated
        + np.repeat(c_effects, sizes)
        + residuals
    )
    delta_hat = y[treated].mean() - y[~treated].mean()
    return float(delta_hat / config.wald_se)


def simulate_z(config: TrialSimConfig, cluster_sizes: list[int], seed: int) -> float:
    """One Wald Z realisation for fixed cluster sizes."""
    sizes = np.asarray(cluster_sizes, dtype=np.int64)
    if sizes.shape != (config.c_total,) or (sizes < 1).any():
        raise ValueError("cluster_sizes must hold one positive size per cluster")
    rng = np.random.Generator(np.random.PCG64(seed))
    return _simulate_z(config, sizes, rng)


def empirical_power(config: TrialSimConfig) -> tuple[float, float]:
    """Rejection fraction over config.reps trials and its binomial stderr.

    Cluster sizes are redrawn every rep. Rep j consumes its own generator
    spawned from the root seed, so the estimate is identical no matter how
    the reps would be scheduled.
    """
    if config.reps < 100:
        raise ValueError(f"reps must be >= 100, got {config.reps}")
    crit = critical_z(config.alpha, config.sidedness)
    two_sided = config.sidedness == TWO_SIDED
    rejected = 0
    for child in np.random.SeedSequence(config.seed).spawn(config.reps):
        rng = np.random.Generator(np.random.PCG64(child))
        sizes = _draw_sizes(config.n_bar, config.nu, config.c_total, rng)
        z = _simulate_z(config, sizes, rng)
        if (abs(z) >= crit) if two_sided else (z >= crit):
            rejected += 1
    p_hat = rejected / config.reps
    stderr = math.sqrt(p_hat * (1.0 - p_hat) / config.reps)
    return p_hat, stderr
