"""Assurance estimator: point-mass exactness, atom averages, stderr scaling.

The two-atom check is oracled by a brute-force average of closed-form power
evaluations built on the series/continued-fraction normal CDF in oracles.py,
so the averaging path never certifies itself.
"""

from __future__ import annotations

import math

import numpy as np
import pytest

import oracles
from crtassure.assurance import assurance, assurance_limit
from crtassure.distributions import LogitNormalSpec
from crtassure.power import (
    ONE_SIDED,
    TWO_SIDED,
    NuisanceParams,
    power,
    power_limit,
)
from crtassure.priors import (
    IndependentJointSpec,
    MarginalPrior,
    NuisanceDrawSet,
    PriorSpec,
    fit_icc_from_quantiles,
    sample_prior,
)

DELTA_M = 2.52
ICONS_POINT = NuisanceParams(sigma=8.32, rho=0.0296, nu=0.49)


def icons_rho_only_prior() -> PriorSpec:
    """Fitted logit-normal ICC, sigma and nu pinned at the point estimates."""
    return PriorSpec(
        joint=IndependentJointSpec(
            rho=MarginalPrior.logit_normal(fit_icc_from_quantiles(0.0296, 0.00131, 0.330)),
            sigma=MarginalPrior.point(8.32),
        ),
        nu=MarginalPrior.point(0.49),
    )


def oracle_power(delta: float, psi: NuisanceParams, c_total: int, n_bar: float) -> float:
    de = 1.0 + ((psi.nu**2 + 1.0) * n_bar - 1.0) * psi.rho
    se = math.sqrt(4.0 * psi.sigma**2 * de / (c_total * n_bar))
    z = oracles.normal_quantile_oracle(1 - 0.05 / 2)
    return oracles.normal_cdf_oracle(delta / se - z)


class TestPointMass:
    def test_twenty_random_configs_reproduce_power_exactly(self):
        # degenerate prior: the short-circuit must return power bit-for-bit
        rng = np.random.default_rng(20240814)
        for _ in range(20):
            psi = NuisanceParams(
                sigma=float(rng.uniform(0.5, 20.0)),
                rho=float(rng.uniform(0.0, 0.5)),
                nu=float(rng.uniform(0.0, 1.2)),
            )
            c_total = 2 * int(rng.integers(1, 50))
            n_bar = float(rng.integers(1, 200))
            alpha = float(rng.choice([0.01, 0.05, 0.1]))
            sided = str(rng.choice([ONE_SIDED, TWO_SIDED]))
            draws = NuisanceDrawSet.from_point(psi)
            est = assurance(DELTA_M, draws, c_total, n_bar, alpha, sided)
            assert est.value == power(DELTA_M, psi, c_total, n_bar, alpha, sided)
            assert est.mc_stderr == 0.0
            assert est.s == 1

    def test_replicated_point_still_short_circuits(self):
        draws = NuisanceDrawSet.from_params([ICONS_POINT] * 64)
        est = assurance(DELTA_M, draws, 40, 17)
        assert est.value == power(DELTA_M, ICONS_POINT, 40, 17)
        assert est.mc_stderr == 0.0

    def test_limit_point_mass(self):
        draws = NuisanceDrawSet.from_point(ICONS_POINT)
        assert assurance_limit(DELTA_M, draws, 40) == power_limit(DELTA_M, ICONS_POINT, 40)


class TestAtomAverages:
    def test_two_atom_icc_prior_is_exact_average(self):
        atoms = [
            NuisanceParams(sigma=8.32, rho=0.01, nu=0.49),
            NuisanceParams(sigma=8.32, rho=0.30, nu=0.49),
        ]
        draws = NuisanceDrawSet.from_params(atoms)
        est = assurance(DELTA_M, draws, 40, 17)
        expected = 0.5 * sum(oracle_power(DELTA_M, p, 40, 17) for p in atoms)
        assert est.value == pytest.approx(expected, abs=1e-12)
        # the average sits strictly between the two branch powers
        p_lo = oracle_power(DELTA_M, atoms[0], 40, 17)
        p_hi = oracle_power(DELTA_M, atoms[1], 40, 17)
        assert min(p_lo, p_hi) < est.value < max(p_lo, p_hi)

    def test_weighted_atoms_via_replication(self):
        # 2/3 vs 1/3 weights expressed as repeated draws
        lo = NuisanceParams(sigma=8.32, rho=0.01, nu=0.49)
        hi = NuisanceParams(sigma=8.32, rho=0.30, nu=0.49)
        draws = NuisanceDrawSet.from_params([lo, lo, hi])
        est = assurance(DELTA_M, draws, 40, 17)
        expected = (2 * oracle_power(DELTA_M, lo, 40, 17) + oracle_power(DELTA_M, hi, 40, 17)) / 3
        assert est.value == pytest.approx(expected, abs=1e-12)
        assert est.mc_stderr > 0

    def test_five_atom_sigma_fan(self):
        atoms = [NuisanceParams(sigma=s, rho=0.0296, nu=0.49) for s in (6.0, 7.0, 8.0, 9.0, 10.0)]
        draws = NuisanceDrawSet.from_params(atoms)
        est = assurance(DELTA_M, draws, 40, 17)
        expected = sum(oracle_power(DELTA_M, p, 40, 17) for p in atoms) / 5
        assert est.value == pytest.approx(expected, abs=1e-12)
        powers = [oracle_power(DELTA_M, p, 40, 17) for p in atoms]
        assert est.mc_stderr == pytest.approx(np.std(powers, ddof=1) / math.sqrt(5), abs=1e-12)

    def test_limit_two_atoms(self):
        atoms = [
            NuisanceParams(sigma=8.32, rho=0.01, nu=0.49),
            NuisanceParams(sigma=8.32, rho=0.30, nu=0.49),
        ]
        draws = NuisanceDrawSet.from_params(atoms)
        got = assurance_limit(DELTA_M, draws, 40)
        want = 0.5 * (power_limit(DELTA_M, atoms[0], 40) + power_limit(DELTA_M, atoms[1], 40))
        assert got == pytest.approx(want, abs=1e-12)


class TestInvariants:
    def test_bounds_between_extreme_draw_powers(self):
        draws = sample_prior(icons_rho_only_prior(), s=512, seed=7)
        est = assurance(DELTA_M, draws, 40, 17)
        per_draw = [power(DELTA_M, p, 40, 17) for p in draws.draws]
        assert min(per_draw) <= est.value <= max(per_draw)
        assert est.value == pytest.approx(np.mean(per_draw), abs=1e-12)

    def test_strictly_increasing_in_n_bar_under_crn(self):
        draws = sample_prior(icons_rho_only_prior(), s=256, seed=11)
        grid = [2, 5, 10, 17, 40, 100, 400]
        values = [assurance(DELTA_M, draws, 40, n).value for n in grid]
        assert all(a < b for a, b in zip(values, values[1:]))

    def test_strictly_increasing_in_clusters_under_crn(self):
        draws = sample_prior(icons_rho_only_prior(), s=256, seed=11)
        values = [assurance(DELTA_M, draws, c, 17).value for c in (10, 20, 40, 80)]
        assert all(a < b for a, b in zip(values, values[1:]))

    def test_limit_dominates_every_finite_design(self):
        draws = sample_prior(icons_rho_only_prior(), s=256, seed=13)
        cap = assurance_limit(DELTA_M, draws, 40)
        values = [assurance(DELTA_M, draws, 40, n).value for n in (5, 50, 500, 5000, 50000)]
        assert all(v < cap for v in values)
        # monotone approach: gaps shrink as n_bar grows
        gaps = [cap - v for v in values]
        assert all(a > b for a, b in zip(gaps, gaps[1:]))

    def test_all_zero_icc_limit_is_one(self):
        params = [NuisanceParams(sigma=s, rho=0.0, nu=0.49) for s in (4.0, 8.32, 12.0)]
        draws = NuisanceDrawSet.from_params(params)
        assert assurance_limit(DELTA_M, draws, 40) == 1.0

    def test_stderr_scaling_with_sample_size(self):
        # doubling S should shrink mc_stderr by ~1/sqrt(2) ~ 0.707
        spec = icons_rho_only_prior()
        ratios = []
        for rep in range(20):
            small = sample_prior(spec, s=400, seed=1000 + rep)
            large = sample_prior(spec, s=800, seed=2000 + rep)
            a = assurance(DELTA_M, small, 40, 17).mc_stderr
            b = assurance(DELTA_M, large, 40, 17).mc_stderr
            ratios.append(b / a)
        assert all(0.6 <= r <= 0.85 for r in ratios)
        assert 0.65 <= float(np.mean(ratios)) <= 0.78

    def test_icons_rho_only_hits_published_design(self):
        # a 40-cluster trial with n_bar = 17 was reported to reach 80% assurance
        draws = sample_prior(icons_rho_only_prior(), s=20_000, seed=101)
        est = assurance(DELTA_M, draws, 40, 17)
        assert est.value == pytest.approx(0.80, abs=0.03)
        assert 0 < est.mc_stderr < 0.005


class TestDeterminism:
    def test_same_seed_same_estimate(self):
        spec = icons_rho_only_prior()
        a = assurance(DELTA_M, sample_prior(spec, 1000, seed=42), 40, 17)
        b = assurance(DELTA_M, sample_prior(spec, 1000, seed=42), 40, 17)
        assert a == b

    def test_seed_moves_spread_prior_estimate(self):
        spec = icons_rho_only_prior()
        a = assurance(DELTA_M, sample_prior(spec, 1000, seed=1), 40, 17)
        b = assurance(DELTA_M, sample_prior(spec, 1000, seed=2), 40, 17)
        assert a.value != b.value

    def test_estimate_carries_provenance(self):
        draws = sample_prior(icons_rho_only_prior(), 100, seed=5)
        est = assurance(DELTA_M, draws, 40, 17)
        assert est.seed == 5
        assert est.spec_digest == draws.spec_digest
        assert est.c_total == 40 and est.n_bar == 17 and est.s == 100


class TestValidation:
    def test_rejects_bad_delta(self):
        draws = NuisanceDrawSet.from_point(ICONS_POINT)
        for bad in (0.0, -1.0, math.inf, math.nan):
            with pytest.raises(ValueError):
                assurance(bad, draws, 40, 17)
            with pytest.raises(ValueError):
                assurance_limit(bad, draws, 40)

    def test_rejects_bad_n_bar(self):
        draws = NuisanceDrawSet.from_point(ICONS_POINT)
        with pytest.raises(ValueError):
            assurance(DELTA_M, draws, 40, 0.5)

    def test_rejects_odd_cluster_count(self):
        draws = NuisanceDrawSet.from_point(ICONS_POINT)
        with pytest.raises(ValueError):
            assurance(DELTA_M, draws, 41, 17)
        with pytest.raises(ValueError):
            assurance_limit(DELTA_M, draws, 41)

    def test_empty_draw_sets_cannot_exist(self):
        with pytest.raises(ValueError):
            NuisanceDrawSet(
                sigma=np.array([]), rho=np.array([]), nu=np.array([]), seed=0, spec_digest=""
            )
