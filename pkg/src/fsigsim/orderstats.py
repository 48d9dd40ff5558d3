"""Exponentially-dominated tails, tail quantiles and order-statistic checks.

A distribution has an exponentially-dominated tail with parameters
``(alpha, beta, lam, gamma)`` when ``1 - F(x) ~ alpha x^beta exp(-lam x^gamma)``
as ``x -> inf``. Rayleigh, Rician and Nakagami amplitudes all qualify; the
built-in families cover Exponential (fading power) and Rayleigh (fading
amplitude), and :class:`NumericTail` wraps any user-supplied CDF.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple, Optional

import numpy as np


class TailFamily:
    alpha: float
    beta: float
    lam: float
    gamma: float

    def cdf(self, x):
        raise NotImplementedError

    def sf(self, x):
        return 1.0 - self.cdf(x)

    def quantile(self, q: float) -> Optional[float]:
        """Closed-form inverse CDF, or ``None`` when unavailable."""
        return None

    def sample(self, size, rng: np.random.Generator) -> np.ndarray:
        raise NotImplementedError

    def _check(self):
        if self.alpha <= 0 or self.lam <= 0 or self.gamma <= 0:
            raise ValueError("alpha, lambda and gamma must be positive")


@dataclass(frozen=True)
class Exponential(TailFamily):
    rate: float = 1.0

    def __post_init__(self):
        if self.rate <= 0:
            raise ValueError("rate must be positive")

    alpha = 1.0
    beta = 0.0
    gamma = 1.0

    @property
    def lam(self) -> float:
        return self.rate

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        return np.where(x > 0, -np.expm1(-self.rate * np.maximum(x, 0)), 0.0)

    def sf(self, x):
        x = np.asarray(x, dtype=float)
        return np.where(x > 0, np.exp(-self.rate * np.maximum(x, 0)), 1.0)

    def quantile(self, q):
        return -math.log1p(-q) / self.rate

    def tail_quantile_exact(self, p):
        return -math.log(p) / self.rate

    def sample(self, size, rng):
        return rng.standard_exponential(size) / self.rate


@dataclass(frozen=True)
class Rayleigh(TailFamily):
    sigma: float = 1.0

    def __post_init__(self):
        if self.sigma <= 0:
            raise ValueError("sigma must be positive")

    alpha = 1.0
    beta = 0.0
    gamma = 2.0

    @property
    def lam(self) -> float:
        return 1.0 / (2.0 * self.sigma**2)

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        return np.where(x > 0, -np.expm1(-self.lam * np.maximum(x, 0) ** 2), 0.0)

    def sf(self, x):
        x = np.asarray(x, dtype=float)
        return np.where(x > 0, np.exp(-self.lam * np.maximum(x, 0) ** 2), 1.0)

    def quantile(self, q):
        return math.sqrt(-math.log1p(-q) / self.lam)

    def tail_quantile_exact(self, p):
        return math.sqrt(-math.log(p) / self.lam)

    def sample(self, size, rng):
        return self.sigma * np.sqrt(2.0 * rng.standard_exponential(size))


@dataclass(frozen=True)
class NumericTail(TailFamily):
    """Tail family defined only by its CDF and declared tail parameters."""

    cdf_fn: Callable
    alpha: float = 1.0
    beta: float = 0.0
    lam: float = 1.0
    gamma: float = 1.0

    def __post_init__(self):
        self._check()

    def cdf(self, x):
        return np.asarray(self.cdf_fn(np.asarray(x, dtype=float)), dtype=float)

    def sample(self, size, rng):
        u = rng.uniform(size=size)
        flat = np.array([tail_quantile(self, 1.0 - q) for q in np.ravel(u)])
        return flat.reshape(np.shape(u))


def _bisect_quantile(dist: TailFamily, target: float, p: float) -> float:
    hi = 4.0 * extreme_bound(dist, max(2, math.ceil(1.0 / p)))
    while float(dist.cdf(hi)) < target:
        hi *= 2.0
    lo = 0.0
    for _ in range(400):
        mid = 0.5 * (lo + hi)
        if float(dist.cdf(mid)) >= target:
            hi = mid
        else:
            lo = mid
        if hi - lo <= 1e-12 * hi:
            break
    return hi


def tail_quantile(dist: TailFamily, p: float) -> float:
    """Smallest x with ``F(x) >= 1 - p``."""
    if not 0 < p < 1:
        raise ValueError("p must lie in (0, 1)")
    exact = getattr(dist, "tail_quantile_exact", None)
    if exact is not None:
        return exact(p)
    return _bisect_quantile(dist, 1.0 - p, p)


def extreme_bound(dist: TailFamily, k: int) -> float:
    """``((ln K + sqrt(ln K)) / lam) ** (1 / gamma)``: likely upper bound on the max of K draws."""
    if k < 2:
        raise ValueError("K must be >= 2")
    lk = math.log(k)
    return ((lk + math.sqrt(lk)) / dist.lam) ** (1.0 / dist.gamma)


def intermediate_bound(dist: TailFamily, k: int, m: int) -> float:
    """Tail quantile at ``e^2 M / K``: likely lower bound on the M-th largest of K draws."""
    p = math.e**2 * m / k
    if p >= 1:
        raise ValueError("e^2 M / K must be below 1")
    return tail_quantile(dist, p)


def order_statistic(samples: np.ndarray, k_from_top: int) -> np.ndarray:
    """``k_from_top``-th largest value along the last axis (1 = maximum)."""
    k = samples.shape[-1]
    idx = k - k_from_top
    return np.partition(samples, idx, axis=-1)[..., idx]


class RatioStats(NamedTuple):
    mean: float
    p05: float
    ratios: np.ndarray


def empirical_ratio(dist: TailFamily, k: int, m: int, trials: int, rng: np.random.Generator,
                    chunk: int = 200) -> RatioStats:
    """Statistics of ``X_(K-M+1) / X_(K)`` over independent samples of size K."""
    if not 1 <= m < k and not (m == 1 and k == 1):
        raise ValueError("need 1 <= M < K")
    out = []
    done = 0
    while done < trials:
        b = min(chunk, trials - done)
        x = dist.sample((b, k), rng)
        top = np.partition(x, [k - m, k - 1], axis=1)
        out.append(top[:, k - m] / top[:, k - 1])
        done += b
    ratios = np.concatenate(out)
    return RatioStats(float(ratios.mean()), float(np.percentile(ratios, 5)), ratios)


def bound_coverage(dist: TailFamily, k: int, m: int, trials: int, rng: np.random.Generator,
                   chunk: int = 100):
    """Fractions of trials with ``max <= U_K`` and ``X_(K-M+1) >= L_K``."""
    upper = extreme_bound(dist, k)
    lower = intermediate_bound(dist, k, m)
    hits_u = hits_l = 0
    done = 0
    while done < trials:
        b = min(chunk, trials - done)
        x = dist.sample((b, k), rng)
        top = np.partition(x, [k - m, k - 1], axis=1)
        hits_u += int(np.sum(top[:, k - 1] <= upper))
        hits_l += int(np.sum(top[:, k - m] >= lower))
        done += b
    return hits_u / trials, hits_l / trials


def verify_tail_dominance(dist: TailFamily, probe_points) -> float:
    """Largest ``|(1 - F(x)) / (alpha x^beta exp(-lam x^gamma)) - 1|`` over the probes.

    Probes are compared in log space; points where the survival function
    underflows to zero or to a subnormal float are skipped.
    """
    x = np.asarray(probe_points, dtype=float)
    if np.any(np.diff(x) <= 0) or np.any(x <= 0):
        raise ValueError("probe points must be positive and increasing")
    sf = np.asarray(dist.sf(x), dtype=float)
    ok = sf >= np.finfo(float).tiny
    with np.errstate(divide="ignore"):
        log_sf = np.log(np.where(ok, sf, 1.0))
    log_ref = math.log(dist.alpha) + dist.beta * np.log(x) - dist.lam * x**dist.gamma
    if not np.any(ok):
        raise ValueError("survival function underflows at every probe")
    return float(np.max(np.abs(np.expm1(log_sf[ok] - log_ref[ok]))))


def max_min_ratio(dist: TailFamily, n: int, k: int, m: int, snr: float,
                  rng: np.random.Generator) -> float:
    """``min_n log2(1 + c X_{n,(K-M+1)}) / max_n log2(1 + c X_{n,(K)})`` for one draw."""
    x = dist.sample((n, k), rng)
    top = np.partition(x, [k - m, k - 1], axis=1)
    return float(np.log2(1 + snr * top[:, k - m]).min() / np.log2(1 + snr * top[:, k - 1]).max())
