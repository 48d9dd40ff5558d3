"""Interference, rates and the two frequency-selective interference games.

An allocation is an integer array ``a`` of length N with ``a[n]`` the RE
(zero-based) used by user n.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from .channel import ChannelGains, PowerProfile

# Utility gap below which a deviation does not count as an improvement.
PNE_TOL = 1e-12


class UtilityKind(str, enum.Enum):
    NAIVE = "naive"
    MFSIG = "mfsig"


@dataclass(frozen=True)
class UtilitySpec:
    kind: UtilityKind = UtilityKind.MFSIG
    m_best: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, "kind", UtilityKind(self.kind))
        if self.kind is UtilityKind.MFSIG and (self.m_best is None or self.m_best < 1):
            raise ValueError("M-FSIG needs m_best >= 1")

    @classmethod
    def naive(cls) -> "UtilitySpec":
        return cls(UtilityKind.NAIVE)

    @classmethod
    def mfsig(cls, m_best: int) -> "UtilitySpec":
        return cls(UtilityKind.MFSIG, m_best)


@dataclass(frozen=True)
class Weights:
    values: np.ndarray
    w_min: float
    w_max: float

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if self.w_min <= 0:
            raise ValueError("w_min must be positive")
        if np.any(values < self.w_min) or np.any(values > self.w_max):
            raise ValueError("weights outside [w_min, w_max]")
        object.__setattr__(self, "values", values)

    @classmethod
    def uniform(cls, n: int, value: float = 1.0) -> "Weights":
        return cls(np.full(n, float(value)), value, value)

    @classmethod
    def of(cls, values) -> "Weights":
        values = np.asarray(values, dtype=float)
        return cls(values, float(values.min()), float(values.max()))


def as_allocation(alloc, n_res: int) -> np.ndarray:
    a = np.asarray(alloc, dtype=np.intp)
    if a.ndim != 1 or np.any(a < 0) or np.any(a >= n_res):
        raise ValueError(f"allocation entries must lie in [0, {n_res})")
    return a


def interference_matrix(gains: ChannelGains, powers: PowerProfile, alloc) -> np.ndarray:
    """``I[n, k]``: interference user n would see on RE k given the others' choices."""
    n_users, k = gains.n_users, gains.n_res
    a = as_allocation(alloc, k)
    users = np.arange(n_users)
    # contrib[m, n] = P_m |h[m, n, a_m]|^2, self-term removed
    contrib = powers.powers[:, None] * gains.power[users, :, a]
    contrib[users, users] = 0.0
    out = np.zeros((k, n_users))
    np.add.at(out, a, contrib)
    return out.T


def interference(gains, powers, alloc, n: int, k: int) -> float:
    a = as_allocation(alloc, gains.n_res)
    others = (a == k)
    others[n] = False
    return float(np.sum(gains.power[others, n, k] * powers.powers[others]))


def rates(gains: ChannelGains, powers: PowerProfile, alloc) -> np.ndarray:
    """Achievable rate of every user, treating interference as noise."""
    a = as_allocation(alloc, gains.n_res)
    users = np.arange(gains.n_users)
    sig = powers.powers * gains.direct()[users, a]
    inter = interference_matrix(gains, powers, a)[users, a]
    return np.log2(1.0 + sig / (powers.noise_power + inter))


def achievable_rate(gains, powers, alloc, n: int) -> float:
    return float(rates(gains, powers, alloc)[n])


def weighted_sum_rate(gains, powers, alloc, weights: Optional[Weights] = None) -> float:
    r = rates(gains, powers, alloc)
    if weights is None:
        return float(r.sum())
    return float(np.dot(weights.values, r))


def m_best_order(gains: ChannelGains) -> np.ndarray:
    """REs of each user sorted from best to worst; equal gains keep index order."""
    return np.argsort(-gains.magnitudes[np.arange(gains.n_users), np.arange(gains.n_users), :],
                      axis=1, kind="stable")


def m_best_mask(gains: ChannelGains, m: int) -> np.ndarray:
    if not 1 <= m <= gains.n_res:
        raise ValueError("M must lie in [1, K]")
    order = m_best_order(gains)
    mask = np.zeros((gains.n_users, gains.n_res), dtype=bool)
    np.put_along_axis(mask, order[:, :m], True, axis=1)
    return mask


def m_best_set(gains: ChannelGains, n: int, m: int) -> set:
    return set(np.flatnonzero(m_best_mask(gains, m)[n]).tolist())


def mth_best_power(gains: ChannelGains, m: int) -> np.ndarray:
    """``|h[n, n, (K-M+1)]|^2`` for each user n."""
    order = m_best_order(gains)
    users = np.arange(gains.n_users)
    return gains.direct()[users, order[:, m - 1]]


class GameModel:
    """Precomputed per-RE numerators and feasibility mask of one game instance."""

    def __init__(self, gains: ChannelGains, powers: PowerProfile, spec: UtilitySpec):
        self.gains = gains
        self.powers = powers
        self.spec = spec
        direct = gains.direct()
        if spec.kind is UtilityKind.NAIVE:
            self.numerator = powers.powers[:, None] * direct
            self.mask = None
        else:
            mth = mth_best_power(gains, spec.m_best)
            self.numerator = np.repeat((powers.powers * mth)[:, None], gains.n_res, axis=1)
            self.mask = m_best_mask(gains, spec.m_best)

    @property
    def n_users(self) -> int:
        return self.gains.n_users

    @property
    def n_res(self) -> int:
        return self.gains.n_res

    def from_interference(self, inter: np.ndarray, users=None) -> np.ndarray:
        num = self.numerator if users is None else self.numerator[users]
        u = np.log2(1.0 + num / (self.powers.noise_power + inter))
        if self.mask is not None:
            mask = self.mask if users is None else self.mask[users]
            u = np.where(mask, u, 0.0)
        return u

    def utility_matrix(self, alloc) -> np.ndarray:
        """``u[n, k] = u_n(k, a_{-n})`` for every user and RE."""
        return self.from_interference(interference_matrix(self.gains, self.powers, alloc))


def utility_matrix(gains, powers, alloc, spec: UtilitySpec) -> np.ndarray:
    return GameModel(gains, powers, spec).utility_matrix(alloc)


def naive_utility(gains, powers, alloc, n: int, k: int) -> float:
    num = powers.powers[n] * gains.power[n, n, k]
    return float(np.log2(1.0 + num / (powers.noise_power + interference(gains, powers, alloc, n, k))))


def mfsig_utility(gains, powers, alloc, n: int, k: int, m: int) -> float:
    if k not in m_best_set(gains, n, m):
        return 0.0
    num = powers.powers[n] * mth_best_power(gains, m)[n]
    return float(np.log2(1.0 + num / (powers.noise_power + interference(gains, powers, alloc, n, k))))


class PneCheck(NamedTuple):
    is_pne: bool
    user: Optional[int] = None
    better_re: Optional[int] = None

    def __bool__(self) -> bool:
        return self.is_pne


def is_pne(gains, powers, alloc, spec: UtilitySpec, model: Optional[GameModel] = None) -> PneCheck:
    """Check that no user has a strictly improving unilateral deviation."""
    model = model or GameModel(gains, powers, spec)
    a = as_allocation(alloc, gains.n_res)
    u = model.utility_matrix(a)
    current = u[np.arange(len(a)), a]
    gain = u.max(axis=1) - current
    bad = np.flatnonzero(gain > PNE_TOL * np.maximum(1.0, np.abs(current)))
    if bad.size == 0:
        return PneCheck(True)
    n = int(bad[0])
    return PneCheck(False, n, int(np.argmax(u[n])))


def all_allocations(n_users: int, n_res: int) -> np.ndarray:
    return np.array(list(itertools.product(range(n_res), repeat=n_users)), dtype=np.intp)


def enumerate_pne(gains, powers, spec: UtilitySpec) -> np.ndarray:
    """Every PNE by exhaustive search over all ``K^N`` allocations (small games only)."""
    n, k = gains.n_users, gains.n_res
    model = GameModel(gains, powers, spec)
    allocs = all_allocations(n, k)
    onehot = np.zeros((len(allocs), n, k))
    np.put_along_axis(onehot, allocs[:, :, None], 1.0, axis=2)
    weighted = onehot * powers.powers[None, :, None]
    # inter[a, n, k] = sum_{m != n, a_m = k} P_m |h[m, n, k]|^2
    total = np.einsum("amk,mnk->ank", weighted, gains.power)
    own = weighted * gains.direct()[None]
    u = model.from_interference(total - own)
    current = np.take_along_axis(u, allocs[:, :, None], axis=2)[..., 0]
    gain = u.max(axis=2) - current
    stable = np.all(gain <= PNE_TOL * np.maximum(1.0, np.abs(current)), axis=1)
    return allocs[stable]


def strong_interference_rhs(gains: ChannelGains) -> np.ndarray:
    """``rhs[m, l] = max_{n,k} (|h[n,n,l]|^2 / |h[n,n,k]|^2 - 1) / |h[m,n,l]|^2``."""
    direct = gains.direct()  # (n, k)
    worst = direct.min(axis=1)  # max over k of the ratio uses the smallest |h[n,n,k]|
    ratio = direct / worst[:, None] - 1.0  # (n, l)
    return np.max(ratio[None, :, :] / gains.power, axis=1)  # (m, l)


def strong_interference_holds(gains: ChannelGains, powers: PowerProfile) -> bool:
    rhs = strong_interference_rhs(gains)
    snr = powers.powers / powers.noise_power
    return bool(np.all(snr[:, None] >= rhs * (1 - 1e-12)))


def scale_powers_to_strong_interference(gains: ChannelGains, noise: float = 1.0,
                                        margin: float = 1.0) -> PowerProfile:
    """Uniform power just large enough (times ``margin``) for strong interference."""
    if margin < 1:
        raise ValueError("margin must be >= 1")
    rhs = strong_interference_rhs(gains)
    if not np.all(np.isfinite(rhs)):
        raise ValueError("degenerate channel gains")
    level = margin * noise * max(float(rhs.max()), np.finfo(float).tiny)
    return PowerProfile(np.full(gains.n_users, level), noise)
