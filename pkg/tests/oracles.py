"""Reference implementations used only by the tests.

Everything here is deliberately written from scratch on top of math.lgamma
and plain Python loops, so that library-backed code in the package is
checked against an independent route: the regularized incomplete gamma via
its power series and continued fraction, the normal CDF through the same
incomplete-gamma identity, and quantiles by interval bisection. Slow but
trustworthy; none of it is imported by the package itself.
"""

from __future__ import annotations

import math

_EPS = 1e-17
_TINY = 1e-300
_MAX_ITER = 100000


def reg_lower_gamma(a: float, x: float) -> float:
    """Regularized lower incomplete gamma P(a, x).

    Power series for x < a + 1, continued fraction (modified Lentz) for the
    complement otherwise; the standard split keeps both expansions in their
    fast-converging regime.
    """
    if a <= 0:
        raise ValueError("shape must be > 0")
    if x <= 0:
        return 0.0
    if x < a + 1.0:
        return _lower_series(a, x)
    return 1.0 - _upper_continued_fraction(a, x)


def _log_prefix(a: float, x: float) -> float:
    # common factor x^a e^-x / Gamma(a) on the log scale
    return a * math.log(x) - x - math.lgamma(a)


def _lower_series(a: float, x: float) -> float:
    term = 1.0 / a
    total = term
    n = 0
    while n < _MAX_ITER:
        n += 1
        term *= x / (a + n)
        total += term
        if abs(term) < abs(total) * _EPS:
            break
    return math.exp(_log_prefix(a, x)) * total


def _upper_continued_fraction(a: float, x: float) -> float:
    b = x + 1.0 - a
    c = 1.0 / _TINY
    d = 1.0 / b if b != 0.0 else 1.0 / _TINY
    h = d
    for i in range(1, _MAX_ITER):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < _TINY:
            d = _TINY
        c = b + an / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            break
    return math.exp(_log_prefix(a, x)) * h


def gamma_cdf_oracle(shape: float, rate: float, x: float) -> float:
    if x <= 0:
        return 0.0
    return reg_lower_gamma(shape, rate * x)


def gamma_quantile_oracle(shape: float, rate: float, u: float) -> float:
    """Invert the gamma CDF by bisection, independent of any library inverse."""
    if not 0.0 <= u <= 1.0:
        raise ValueError("u must lie in [0, 1]")
    if u == 0.0:
        return 0.0
    if u == 1.0:
        return math.inf
    hi = max(1.0, shape / rate)
    while gamma_cdf_oracle(shape, rate, hi) < u:
        hi *= 2.0
    lo = 0.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if gamma_cdf_oracle(shape, rate, mid) < u:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def normal_cdf_oracle(x: float) -> float:
    """Phi(x) through erf(t) = P(1/2, t^2), so it shares the audited
    incomplete-gamma code instead of any library error function."""
    if x == 0.0:
        return 0.5
    p = reg_lower_gamma(0.5, 0.5 * x * x)
    return 0.5 * (1.0 + p) if x > 0 else 0.5 * (1.0 - p)


def normal_quantile_oracle(u: float) -> float:
    if not 0.0 < u < 1.0:
        raise ValueError("u must lie in (0, 1)")
    lo, hi = -40.0, 40.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if normal_cdf_oracle(mid) < u:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def logit_normal_cdf_oracle(mu: float, sigma_logit: float, x: float) -> float:
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    z = (math.log(x / (1.0 - x)) - mu) / sigma_logit
    return normal_cdf_oracle(z)


def logit_normal_mean_oracle(mu: float, sigma_logit: float, n_grid: int = 200001) -> float:
    """Mean of expit(mu + sigma*Z) by trapezoid quadrature over z in [-12, 12].

    The integrand decays like the normal density, so the truncation error is
    far below the 1e-10 the tests care about.
    """
    lo, hi = -12.0, 12.0
    h = (hi - lo) / (n_grid - 1)
    total = 0.0
    for i in range(n_grid):
        z = lo + i * h
        w = 0.5 if i in (0, n_grid - 1) else 1.0
        val = 1.0 / (1.0 + math.exp(-(mu + sigma_logit * z)))
        total += w * val * math.exp(-0.5 * z * z)
    return total * h / math.sqrt(2.0 * math.pi)


def icc_fit_oracle(
    median: float,
    lo95: float,
    hi95: float,
    s_lo: float = 1e-3,
    s_hi: float = 6.0,
    n_grid: int = 600001,
) -> tuple[float, float]:
    """Grid search for the logit-normal least-squares fit to a median and a
    central 95% interval. mu is pinned by the median; the spread minimises
    the two tail errors on the logit scale."""
    mu = math.log(median / (1.0 - median))
    z975 = normal_quantile_oracle(0.975)
    target_lo = math.log(lo95 / (1.0 - lo95))
    target_hi = math.log(hi95 / (1.0 - hi95))
    best_s, best_err = s_lo, math.inf
    step = (s_hi - s_lo) / (n_grid - 1)
    for i in range(n_grid):
        s = s_lo + i * step
        err = (mu - z975 * s - target_lo) ** 2 + (mu + z975 * s - target_hi) ** 2
        if err < best_err:
            best_err, best_s = err, s
    return mu, best_s


def two_sample_power_oracle(delta: float, sigma: float, n_per_arm: float, alpha: float) -> float:
    """Classical two-sample z-test power with known variance, two-sided."""
    se = sigma * math.sqrt(2.0 / n_per_arm)
    z_crit = normal_quantile_oracle(1.0 - alpha / 2.0)
    return normal_cdf_oracle(delta / se - z_crit)


def rounded_gamma_moments_oracle(
    n_bar: float, nu: float, max_k: int = 100_000
) -> tuple[float, float]:
    """Mean and CV of round-to-nearest (minimum 1) of a gamma variate.

    The size law is Gamma with mean n_bar and sd nu*n_bar; rounding to the
    integer grid with a floor of 1 shifts both moments, and this computes the
    shifted values exactly from CDF differences: P(R=1) = F(1.5),
    P(R=k) = F(k+0.5) - F(k-0.5). Used to quantify the rounding bias the
    simulator's cluster-size draws inherit.
    """
    shape = 1.0 / nu**2
    rate = shape / n_bar
    mean = 0.0
    second = 0.0
    prev = 0.0
    for k in range(1, max_k + 1):
        hi = gamma_cdf_oracle(shape, rate, k + 0.5)
        p = hi - prev if k > 1 else hi
        prev = hi
        mean += k * p
        second += k * k * p
        if hi > 1.0 - 1e-14 and k > n_bar:
            break
    var = second - mean * mean
    return mean, math.sqrt(max(var, 0.0)) / mean
