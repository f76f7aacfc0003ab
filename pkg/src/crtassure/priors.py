"""Priors over the nuisance parameters (sigma, rho, nu) and their samplers.

Three joint constructions are supported for (rho, sigma):

* independent marginals,
* a bivariate Gaussian copula binding arbitrary rho and sigma marginals
  with a latent normal correlation gamma_corr,
* an induced prior that places independent gammas on the variance
  components sigma_b^2 and sigma_w^2 and derives sigma = sqrt(sum) and
  rho = sigma_b^2 / sum, which correlates rho and sigma automatically.

nu always gets its own independent marginal. Point masses are represented
exactly (a degenerate marginal yields a constant column, never a
zero-variance gamma approximation), which keeps assurance at a point prior
identical to closed-form power. Sampling is reproducible: one 64-bit seed
is fanned out to the sub-streams through numpy's SeedSequence, and a SHA-256
digest of the prior definition travels with every draw set so downstream
results can state exactly which prior produced them.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .distributions import (
    EmpiricalDist,
    GammaSpec,
    LogitNormalSpec,
    empirical_quantile,
    empirical_sample,
    gamma_quantile,
    gamma_sample,
    logit,
    logit_normal_quantile,
    logit_normal_sample,
    standard_normal_cdf,
    standard_normal_quantile,
)
from .power import NuisanceParams

__all__ = [
    "MarginalPrior",
    "IndependentJointSpec",
    "CopulaJointSpec",
    "InducedJointSpec",
    "PriorSpec",
    "NuisanceDrawSet",
    "CopulaGammaEstimate",
    "gamma_from_mean_var",
    "fit_icc_from_quantiles",
    "sample_copula",
    "sample_induced",
    "estimate_copula_gamma",
    "sample_prior",
    "canonical_digest",
    "prior_digest",
    "point_digest",
    "marginal_medians",
]

KIND_POINT = "point"
KIND_GAMMA = "gamma"
KIND_EMPIRICAL = "empirical"
KIND_LOGIT_NORMAL = "logit-normal"

SeedLike = Union[int, np.random.SeedSequence]


@dataclass(frozen=True)
class MarginalPrior:
    """Single-parameter prior: a point mass, gamma, empirical sample or
    logit-normal, addressed uniformly through quantile/median/sample."""

    kind: str
    payload: float | GammaSpec | EmpiricalDist | LogitNormalSpec

    def __post_init__(self) -> None:
        expected = {
            KIND_POINT: float,
            KIND_GAMMA: GammaSpec,
            KIND_EMPIRICAL: EmpiricalDist,
            KIND_LOGIT_NORMAL: LogitNormalSpec,
        }
        if self.kind not in expected:
            raise ValueError(f"unknown marginal kind {self.kind!r}")
        if self.kind == KIND_POINT:
            value = float(self.payload)
            if not math.isfinite(value):
                raise ValueError("point mass must be finite")
            object.__setattr__(self, "payload", value)
        elif not isinstance(self.payload, expected[self.kind]):
            raise TypeError(f"{self.kind} marginal expects {expected[self.kind].__name__}")

    @classmethod
    def point(cls, value: float) -> "MarginalPrior":
        return cls(KIND_POINT, float(value))

    @classmethod
    def gamma(cls, spec: GammaSpec) -> "MarginalPrior":
        return cls(KIND_GAMMA, spec)

    @classmethod
    def empirical(cls, dist: EmpiricalDist) -> "MarginalPrior":
        return cls(KIND_EMPIRICAL, dist)

    @classmethod
    def logit_normal(cls, spec: LogitNormalSpec) -> "MarginalPrior":
        return cls(KIND_LOGIT_NORMAL, spec)

    def quantile(self, u):
        if self.kind == KIND_POINT:
            u = np.asarray(u, dtype=float)
            if np.any((u < 0) | (u > 1)):
                raise ValueError("quantile argument must lie in [0, 1]")
            out = np.full_like(u, self.payload)
            return out if out.ndim else float(out)
        if self.kind == KIND_GAMMA:
            return gamma_quantile(self.payload, u)
        if self.kind == KIND_EMPIRICAL:
            return empirical_quantile(self.payload, u)
        return logit_normal_quantile(self.payload, u)

    def median(self) -> float:
        if self.kind == KIND_LOGIT_NORMAL:
            return self.payload.median  # expit(mu), exact
        return float(np.asarray(self.quantile(0.5)))

    def sample(self, n: int, seed: SeedLike) -> np.ndarray:
        if self.kind == KIND_POINT:
            return np.full(n, self.payload, dtype=float)
        if self.kind == KIND_GAMMA:
            return gamma_sample(self.payload, n, seed)
        if self.kind == KIND_EMPIRICAL:
            return empirical_sample(self.payload, n, seed)
        return logit_normal_sample(self.payload, n, seed)

    def support_min(self) -> float:
        if self.kind == KIND_POINT:
            return self.payload
        if self.kind == KIND_GAMMA:
            return 0.0
        if self.kind == KIND_EMPIRICAL:
            return self.payload.min
        return 0.0

    def support_max(self) -> float:
        if self.kind == KIND_POINT:
            return self.payload
        if self.kind == KIND_GAMMA:
            return math.inf
        if self.kind == KIND_EMPIRICAL:
            return self.payload.max
        return 1.0

    def to_dict(self) -> dict:
        if self.kind == KIND_POINT:
            return {"kind": KIND_POINT, "value": self.payload}
        if self.kind == KIND_GAMMA:
            return {"kind": KIND_GAMMA, "shape": self.payload.shape, "rate": self.payload.rate}
        if self.kind == KIND_EMPIRICAL:
            return {"kind": KIND_EMPIRICAL, "samples": list(self.payload.samples)}
        return {
            "kind": KIND_LOGIT_NORMAL,
            "mu": self.payload.mu,
            "sigma_logit": self.payload.sigma_logit,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "MarginalPrior":
        kind = doc.get("kind")
        if kind == KIND_POINT:
            return cls.point(doc["value"])
        if kind == KIND_GAMMA:
            return cls.gamma(GammaSpec(shape=doc["shape"], rate=doc["rate"]))
        if kind == KIND_EMPIRICAL:
            return cls.empirical(EmpiricalDist(samples=tuple(doc["samples"])))
        if kind == KIND_LOGIT_NORMAL:
            return cls.logit_normal(
                LogitNormalSpec(mu=doc["mu"], sigma_logit=doc["sigma_logit"])
            )
        raise ValueError(f"unknown marginal kind {kind!r}")


def _validate_marginal_for(marginal: MarginalPrior, param: str) -> None:
    """Reject marginals whose support leaves the parameter's domain.

    The logit-normal lives on the open unit interval, so it is always
    admissible for rho; a gamma never is (it spills past 1). Point and
    empirical marginals are checked value by value.
    """
    kind = marginal.kind
    lo, hi = marginal.support_min(), marginal.support_max()
    if param == "rho":
        if kind == KIND_GAMMA:
            raise ValueError("a gamma marginal spills past 1 and cannot serve as a rho prior")
        if kind in (KIND_POINT, KIND_EMPIRICAL) and (lo < 0 or hi >= 1):
            raise ValueError(f"rho prior support [{lo}, {hi}] must lie within [0, 1)")
    elif param == "sigma":
        if kind in (KIND_POINT, KIND_EMPIRICAL) and lo <= 0:
            raise ValueError(f"sigma prior support must be positive, got min {lo}")
    elif param == "nu":
        if kind in (KIND_POINT, KIND_EMPIRICAL) and lo < 0:
            raise ValueError(f"nu prior support must lie within [0, inf), got min {lo}")
    else:  # pragma: no cover - internal misuse
        raise ValueError(f"unknown parameter {param!r}")


@dataclass(frozen=True)
class IndependentJointSpec:
    """(rho, sigma) drawn independently from their marginals."""

    rho: MarginalPrior
    sigma: MarginalPrior

    def __post_init__(self) -> None:
        _validate_marginal_for(self.rho, "rho")
        _validate_marginal_for(self.sigma, "sigma")

    def to_dict(self) -> dict:
        return {"kind": "independent", "rho": self.rho.to_dict(), "sigma": self.sigma.to_dict()}


@dataclass(frozen=True)
class CopulaJointSpec:
    """(rho, sigma) bound by a Gaussian copula with latent correlation
    gamma_corr while keeping the stated marginals exactly."""

    rho: MarginalPrior
    sigma: MarginalPrior
    gamma_corr: float

    def __post_init__(self) -> None:
        _validate_marginal_for(self.rho, "rho")
        _validate_marginal_for(self.sigma, "sigma")
        if not (-1.0 < self.gamma_corr < 1.0):
            raise ValueError(f"gamma_corr must lie in (-1, 1), got {self.gamma_corr}")

    def to_dict(self) -> dict:
        return {
            "kind": "copula",
            "rho": self.rho.to_dict(),
            "sigma": self.sigma.to_dict(),
            "gamma_corr": self.gamma_corr,
        }


@dataclass(frozen=True)
class InducedJointSpec:
    """(rho, sigma) induced by independent gammas on the variance components
    sigma_b^2 (between clusters) and sigma_w^2 (within)."""

    sigma_b_sq: GammaSpec
    sigma_w_sq: GammaSpec

    def to_dict(self) -> dict:
        return {
            "kind": "induced",
            "sigma_b_sq": {"shape": self.sigma_b_sq.shape, "rate": self.sigma_b_sq.rate},
            "sigma_w_sq": {"shape": self.sigma_w_sq.shape, "rate": self.sigma_w_sq.rate},
        }


JointSpec = Union[IndependentJointSpec, CopulaJointSpec, InducedJointSpec]


@dataclass(frozen=True)
class PriorSpec:
    """Complete prior over (sigma, rho, nu): a joint block plus a nu marginal."""

    joint: JointSpec
    nu: MarginalPrior

    def __post_init__(self) -> None:
        if not isinstance(
            self.joint, (IndependentJointSpec, CopulaJointSpec, InducedJointSpec)
        ):
            raise TypeError("joint must be an independent, copula or induced spec")
        _validate_marginal_for(self.nu, "nu")

    def to_dict(self) -> dict:
        return {"joint": self.joint.to_dict(), "nu": self.nu.to_dict()}

    @classmethod
    def from_dict(cls, doc: dict) -> "PriorSpec":
        joint_doc = doc["joint"]
        kind = joint_doc.get("kind")
        joint: JointSpec
        if kind == "independent":
            joint = IndependentJointSpec(
                rho=MarginalPrior.from_dict(joint_doc["rho"]),
                sigma=MarginalPrior.from_dict(joint_doc["sigma"]),
            )
        elif kind == "copula":
            joint = CopulaJointSpec(
                rho=MarginalPrior.from_dict(joint_doc["rho"]),
                sigma=MarginalPrior.from_dict(joint_doc["sigma"]),
                gamma_corr=joint_doc["gamma_corr"],
            )
        elif kind == "induced":
            joint = InducedJointSpec(
                sigma_b_sq=GammaSpec(**joint_doc["sigma_b_sq"]),
                sigma_w_sq=GammaSpec(**joint_doc["sigma_w_sq"]),
            )
        else:
            raise ValueError(f"unknown joint kind {kind!r}")
        return cls(joint=joint, nu=MarginalPrior.from_dict(doc["nu"]))

    @classmethod
    def from_point(cls, psi: NuisanceParams) -> "PriorSpec":
        return cls(
            joint=IndependentJointSpec(
                rho=MarginalPrior.point(psi.rho), sigma=MarginalPrior.point(psi.sigma)
            ),
            nu=MarginalPrior.point(psi.nu),
        )


def canonical_digest(doc: dict) -> str:
    """SHA-256 over the sorted, compact JSON encoding of a mapping."""
    payload = json.dumps(doc, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


_canonical_digest = canonical_digest


def prior_digest(spec: PriorSpec) -> str:
    """SHA-256 of the canonical JSON form of the prior definition."""
    return _canonical_digest(spec.to_dict())


def point_digest(psi: NuisanceParams) -> str:
    return _canonical_digest({"point": {"sigma": psi.sigma, "rho": psi.rho, "nu": psi.nu}})


@dataclass(frozen=True)
class NuisanceDrawSet:
    """Materialised Monte Carlo draws of (sigma, rho, nu).

    Columns are equal-length float arrays, one row per draw. A draw set is
    immutable: searches that share it across candidate designs rely on
    common random numbers for monotone comparisons. Every draw must respect
    the parameter supports; a violation means a sampler bug, not user error.
    """

    sigma: np.ndarray
    rho: np.ndarray
    nu: np.ndarray
    seed: int
    spec_digest: str

    def __post_init__(self) -> None:
        sigma = np.ascontiguousarray(self.sigma, dtype=float)
        rho = np.ascontiguousarray(self.rho, dtype=float)
        nu = np.ascontiguousarray(self.nu, dtype=float)
        if not (sigma.ndim == rho.ndim == nu.ndim == 1):
            raise ValueError("draw columns must be one-dimensional")
        if not (sigma.size == rho.size == nu.size) or sigma.size == 0:
            raise ValueError("draw columns must share a positive length")
        if not np.all(sigma > 0):
            raise RuntimeError("internal error: sigma draw outside (0, inf)")
        if not (np.all(rho >= 0) and np.all(rho < 1)):
            raise RuntimeError("internal error: rho draw outside [0, 1)")
        if not np.all(nu >= 0):
            raise RuntimeError("internal error: nu draw outside [0, inf)")
        for name, arr in (("sigma", sigma), ("rho", rho), ("nu", nu)):
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)

    @property
    def s(self) -> int:
        return int(self.sigma.size)

    @property
    def draws(self) -> list[NuisanceParams]:
        return [
            NuisanceParams(sigma=float(s), rho=float(r), nu=float(n))
            for s, r, n in zip(self.sigma, self.rho, self.nu)
        ]

    @classmethod
    def from_point(cls, psi: NuisanceParams, seed: int = 0) -> "NuisanceDrawSet":
        return cls(
            sigma=np.array([psi.sigma]),
            rho=np.array([psi.rho]),
            nu=np.array([psi.nu]),
            seed=seed,
            spec_digest=point_digest(psi),
        )

    @classmethod
    def from_params(
        cls, params: list[NuisanceParams], seed: int = 0, spec_digest: str = ""
    ) -> "NuisanceDrawSet":
        digest = spec_digest or _canonical_digest(
            {"params": [{"sigma": p.sigma, "rho": p.rho, "nu": p.nu} for p in params]}
        )
        return cls(
            sigma=np.array([p.sigma for p in params]),
            rho=np.array([p.rho for p in params]),
            nu=np.array([p.nu for p in params]),
            seed=seed,
            spec_digest=digest,
        )


# ---------------------------------------------------------------------------
# constructors from summaries
# ---------------------------------------------------------------------------


def gamma_from_mean_var(mean: float, var: float) -> GammaSpec:
    """Moment-match a gamma: shape = mean^2/var, rate = mean/var."""
    if not (mean > 0 and math.isfinite(mean)):
        raise ValueError(f"mean must be > 0, got {mean}")
    if not (var > 0 and math.isfinite(var)):
        raise ValueError(f"var must be > 0, got {var}")
    return GammaSpec(shape=mean**2 / var, rate=mean / var)


def fit_icc_from_quantiles(median: float, lo95: float, hi95: float) -> LogitNormalSpec:
    """Fit a logit-normal ICC prior to a median and central 95% interval.

    The location is pinned exactly: mu = logit(median), so the fitted median
    is reproduced with zero error. The spread minimises the sum of squared
    errors of the 2.5% and 97.5% quantiles on the logit scale; that
    objective is quadratic in sigma_logit, so the exact minimiser is

        sigma_logit = (logit(hi95) - logit(lo95)) / (2 * z_{0.975}),

    the average of the two single-tail fits. Useful when only a published
    summary of an ICC posterior is available rather than its samples.
    """
    if not (0.0 < lo95 < median < hi95 < 1.0):
        raise ValueError(
            f"need 0 < lo95 < median < hi95 < 1, got ({lo95}, {median}, {hi95})"
        )
    mu = float(logit(median))
    z975 = float(standard_normal_quantile(0.975))
    sigma_logit = float(logit(hi95) - logit(lo95)) / (2.0 * z975)
    return LogitNormalSpec(mu=mu, sigma_logit=sigma_logit)


# ---------------------------------------------------------------------------
# samplers
# ---------------------------------------------------------------------------


def _as_seedseq(seed: SeedLike) -> np.random.SeedSequence:
    return seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)


def sample_copula(
    spec: CopulaJointSpec, s: int, seed: SeedLike
) -> tuple[np.ndarray, np.ndarray]:
    """Draw s pairs (rho_i, sigma_i) through the Gaussian copula.

    Two-step construction: latent normals x = z1 and
    y = gamma_corr * z1 + sqrt(1 - gamma_corr^2) * z2 are mapped to uniforms
    by Phi and then through each marginal's quantile function. Marginals are
    therefore exact by construction; only the dependence is modelled.
    """
    if s < 1:
        raise ValueError("s must be >= 1")
    rng = np.random.Generator(np.random.PCG64(seed))
    z1 = rng.standard_normal(s)
    z2 = rng.standard_normal(s)
    g = spec.gamma_corr
    x = z1
    y = g * z1 + math.sqrt(1.0 - g * g) * z2
    rho = np.asarray(spec.rho.quantile(standard_normal_cdf(x)), dtype=float)
    sigma = np.asarray(spec.sigma.quantile(standard_normal_cdf(y)), dtype=float)
    return rho, sigma


def _sample_induced_components(
    spec: InducedJointSpec, s: int, seed: SeedLike
) -> tuple[np.ndarray, np.ndarray]:
    # one stream, sigma_b^2 drawn before sigma_w^2; order is part of the
    # reproducibility contract
    ss = _as_seedseq(seed)
    seq_b, seq_w = ss.spawn(2)
    sb = gamma_sample(spec.sigma_b_sq, s, seq_b)
    sw = gamma_sample(spec.sigma_w_sq, s, seq_w)
    return sb, sw


def sample_induced(
    spec: InducedJointSpec, s: int, seed: SeedLike
) -> tuple[np.ndarray, np.ndarray]:
    """Draw s pairs (rho_i, sigma_i) from the variance-component prior.

    Each draw combines sigma_b^2 ~ Gamma and sigma_w^2 ~ Gamma into
    sigma^2 = sigma_b^2 + sigma_w^2 and rho = sigma_b^2 / sigma^2, so the
    identities rho * sigma^2 = sigma_b^2 and (1 - rho) * sigma^2 = sigma_w^2
    hold draw by draw up to floating-point rounding.
    """
    if s < 1:
        raise ValueError("s must be >= 1")
    sb, sw = _sample_induced_components(spec, s, seed)
    total = sb + sw
    rho = sb / total
    sigma = np.sqrt(total)
    return rho, sigma


@dataclass(frozen=True)
class CopulaGammaEstimate:
    """Pearson correlation of (rho, sigma) with a bootstrap standard error."""

    value: float
    stderr: float
    s: int


def estimate_copula_gamma(
    spec: InducedJointSpec, s: int, seed: SeedLike, n_boot: int = 200
) -> CopulaGammaEstimate:
    """Estimate the latent copula correlation matching an induced prior.

    Samples the induced prior, reports the Pearson correlation between the
    rho and sigma columns, and attaches a nonparametric bootstrap standard
    error so the estimate can be quoted honestly.
    """
    if s < 3:
        raise ValueError("s must be >= 3 to estimate a correlation")
    ss = _as_seedseq(seed)
    seq_sample, seq_boot = ss.spawn(2)
    rho, sigma = sample_induced(spec, s, seq_sample)
    value = float(np.corrcoef(rho, sigma)[0, 1])
    rng = np.random.Generator(np.random.PCG64(seq_boot))
    boots = np.empty(n_boot)
    for b in range(n_boot):
        idx = rng.integers(0, s, size=s)
        boots[b] = np.corrcoef(rho[idx], sigma[idx])[0, 1]
    return CopulaGammaEstimate(value=value, stderr=float(np.std(boots, ddof=1)), s=s)


def sample_prior(spec: PriorSpec, s: int, seed: int) -> NuisanceDrawSet:
    """Materialise s draws of (sigma, rho, nu) from a full prior.

    The seed is split deterministically: one sub-stream for the joint
    (rho, sigma) block, one for nu, so marginal changes to one block never
    shift the draws of the other.
    """
    if s < 1:
        raise ValueError("s must be >= 1")
    ss = np.random.SeedSequence(seed)
    seq_joint, seq_nu = ss.spawn(2)
    joint = spec.joint
    if isinstance(joint, IndependentJointSpec):
        seq_rho, seq_sigma = seq_joint.spawn(2)
        rho = joint.rho.sample(s, seq_rho)
        sigma = joint.sigma.sample(s, seq_sigma)
    elif isinstance(joint, CopulaJointSpec):
        rho, sigma = sample_copula(joint, s, seq_joint)
    else:
        rho, sigma = sample_induced(joint, s, seq_joint)
    nu = spec.nu.sample(s, seq_nu)
    return NuisanceDrawSet(
        sigma=sigma, rho=rho, nu=nu, seed=seed, spec_digest=prior_digest(spec)
    )


def marginal_medians(spec: PriorSpec, s: int = 100_000, seed: int = 0) -> NuisanceParams:
    """Medians of the implied marginals, for point-summary power runs.

    Independent and copula joints have closed marginals (a copula leaves
    them untouched), so their medians are analytic. The induced joint has
    no closed marginal for rho or sigma; its medians are taken from a draw
    of size s, deterministic for a given seed.
    """
    joint = spec.joint
    if isinstance(joint, (IndependentJointSpec, CopulaJointSpec)):
        rho_med = joint.rho.median()
        sigma_med = joint.sigma.median()
    else:
        rho, sigma = sample_induced(joint, s, seed)
        rho_med = float(np.median(rho))
        sigma_med = float(np.median(sigma))
    return NuisanceParams(sigma=sigma_med, rho=rho_med, nu=spec.nu.median())
