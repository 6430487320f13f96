"""One-sample t statistics with analytic p-values and Cohen's d.

p-values come from the regularized incomplete beta function (continued
fraction evaluation), not from lookup tables:

    P(|T| >= t) = I_{df/(df+t^2)}(df/2, 1/2)

Effect size follows the convention of subtracting the hypothesized value
from the sample mean and dividing by the sample standard deviation.  A
zero-variance sample off the hypothesized mean reports an infinite t.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .errors import ConfigError

_BETACF_MAX_ITER = 300
_BETACF_EPS = 3e-14
_TINY = 1e-300


@dataclass(frozen=True)
class StatResult:
    t: float
    df: int
    p: float
    sided: str  # "two" or "one"
    d: float


def _betacf(a: float, b: float, x: float) -> float:
    """Continued fraction for the incomplete beta function (modified Lentz)."""
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _TINY:
        d = _TINY
    d = 1.0 / d
    h = d
    for m in range(1, _BETACF_MAX_ITER + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _TINY:
            d = _TINY
        c = 1.0 + aa / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _TINY:
            d = _TINY
        c = 1.0 + aa / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _BETACF_EPS:
            return h
    raise ArithmeticError("incomplete beta continued fraction did not converge")


def regularized_incomplete_beta(a: float, b: float, x: float) -> float:
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    ln_front = (math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
                + a * math.log(x) + b * math.log1p(-x))
    front = math.exp(ln_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, 1.0 - x) / b


def t_two_sided_p(t: float, df: int) -> float:
    """P(|T_df| >= |t|)."""
    if math.isinf(t):
        return 0.0
    x = df / (df + t * t)
    return regularized_incomplete_beta(df / 2.0, 0.5, x)


def mean(values: Sequence[float]) -> float:
    return sum(values) / len(values)


def sample_std(values: Sequence[float]) -> float:
    mu = mean(values)
    n = len(values)
    return math.sqrt(sum((v - mu) ** 2 for v in values) / (n - 1))


def cohens_d(values: Sequence[float], hypothesized_mean: float) -> float:
    sd = sample_std(values)
    diff = mean(values) - hypothesized_mean
    if sd == 0.0:
        if diff == 0.0:
            return 0.0
        return math.copysign(math.inf, diff)
    return diff / sd


def t_test_one_sample(values: Sequence[float], hypothesized_mean: float,
                      sided: str = "two") -> StatResult:
    """One-sample t-test of mean(values) against the hypothesized mean.

    `sided="one"` reports the observed-direction tail (half the two-sided
    p).  Zero-variance samples follow the t = +/-inf convention, or t = 0
    with p = 1 when they sit exactly on the hypothesis.
    """
    if sided not in ("two", "one"):
        raise ConfigError(f"sidedness must be 'two' or 'one', got {sided!r}")
    n = len(values)
    if n < 2:
        raise ConfigError("t-test needs at least 2 values")
    df = n - 1
    if all(v == values[0] for v in values):
        # exact constancy: summation rounding must not fake a variance
        mu, sd = values[0], 0.0
    else:
        mu, sd = mean(values), sample_std(values)
    diff = mu - hypothesized_mean
    if sd == 0.0:
        if diff == 0.0:
            return StatResult(0.0, df, 1.0, sided, 0.0)
        t = math.copysign(math.inf, diff)
        return StatResult(t, df, 0.0, sided, math.copysign(math.inf, diff))
    t = diff / (sd / math.sqrt(n))
    p = t_two_sided_p(t, df)
    if sided == "one":
        p /= 2.0
    return StatResult(t, df, p, sided, diff / sd)
