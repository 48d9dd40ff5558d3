"""User-resource bipartite graphs, matchings and assignment baselines."""

from __future__ import annotations

import enum
from collections import deque
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np
from scipy.optimize import linear_sum_assignment

from . import game
from .channel import ChannelGains, PowerProfile
from .game import Weights


class GraphMode(str, enum.Enum):
    M_BEST = "m_best"
    M_WORST = "m_worst"


@dataclass(frozen=True)
class UserResourceGraph:
    n_users: int
    n_res: int
    adjacency: tuple  # per-user tuple of RE indices
    mode: Optional[GraphMode] = None
    m: Optional[int] = None

    def __post_init__(self):
        adj = tuple(tuple(sorted(set(int(k) for k in row))) for row in self.adjacency)
        if len(adj) != self.n_users:
            raise ValueError("adjacency must have one entry per user")
        for row in adj:
            if any(k < 0 or k >= self.n_res for k in row):
                raise ValueError("RE index out of range")
            if self.m is not None and len(row) != self.m:
                raise ValueError("every user must have exactly m neighbours")
        object.__setattr__(self, "adjacency", adj)

    def with_adjacency(self, adjacency) -> "UserResourceGraph":
        return UserResourceGraph(self.n_users, self.n_res, adjacency)


def build_graph(gains: ChannelGains, m: int, mode=GraphMode.M_BEST) -> UserResourceGraph:
    """Join each user to its ``m`` best (or worst) REs by direct gain."""
    mode = GraphMode(mode)
    if not 1 <= m <= gains.n_res:
        raise ValueError("m must lie in [1, K]")
    order = game.m_best_order(gains)
    picked = order[:, :m] if mode is GraphMode.M_BEST else order[:, ::-1][:, :m]
    return UserResourceGraph(gains.n_users, gains.n_res, tuple(map(tuple, picked)), mode, m)


def graph_from_sets(n_res: int, sets) -> UserResourceGraph:
    return UserResourceGraph(len(sets), n_res, tuple(tuple(s) for s in sets))


def max_matching(graph: UserResourceGraph) -> dict:
    """Hopcroft-Karp maximum-cardinality matching, returned as ``{user: re}``."""
    n_u = graph.n_users
    adj = graph.adjacency
    match_u = [-1] * n_u
    match_v = [-1] * graph.n_res
    inf = n_u + 1
    dist = [0] * n_u

    def bfs() -> bool:
        queue = deque()
        for u in range(n_u):
            if match_u[u] == -1:
                dist[u] = 0
                queue.append(u)
            else:
                dist[u] = inf
        found = False
        while queue:
            u = queue.popleft()
            for v in adj[u]:
                w = match_v[v]
                if w == -1:
                    found = True
                elif dist[w] == inf:
                    dist[w] = dist[u] + 1
                    queue.append(w)
        return found

    def dfs(root: int) -> bool:
        # iterative augmenting-path search along the BFS layering
        stack = [(root, iter(adj[root]))]
        path = []
        while stack:
            u, it = stack[-1]
            advanced = False
            for v in it:
                w = match_v[v]
                if w == -1:
                    path.append((u, v))
                    for pu, pv in path:
                        match_u[pu] = pv
                        match_v[pv] = pu
                    return True
                if dist[w] == dist[u] + 1:
                    path.append((u, v))
                    stack.append((w, iter(adj[w])))
                    advanced = True
                    break
            if not advanced:
                dist[u] = inf
                stack.pop()
                if path:
                    path.pop()
        return False

    while bfs():
        for u in range(n_u):
            if match_u[u] == -1:
                dfs(u)
    return {u: v for u, v in enumerate(match_u) if v != -1}


def has_perfect_matching(graph: UserResourceGraph) -> bool:
    if graph.n_users != graph.n_res:
        raise ValueError("perfect matching needs a balanced graph")
    return len(max_matching(graph)) == graph.n_users


def interference_free_rates(gains: ChannelGains, powers: PowerProfile) -> np.ndarray:
    """``(N, K)`` rates each user would get alone on each RE."""
    return np.log2(1.0 + powers.powers[:, None] * gains.direct() / powers.noise_power)


def optimal_assignment(rate_matrix, weights: Optional[Weights] = None):
    """Weighted-rate maximising one-to-one assignment; returns ``(alloc, value)``."""
    rate_matrix = np.asarray(rate_matrix, dtype=float)
    n, k = rate_matrix.shape
    if n > k:
        raise ValueError("assignment needs N <= K")
    w = np.ones(n) if weights is None else weights.values
    value_matrix = w[:, None] * rate_matrix
    rows, cols = linear_sum_assignment(value_matrix, maximize=True)
    alloc = np.empty(n, dtype=np.intp)
    alloc[rows] = cols
    return alloc, float(value_matrix[rows, cols].sum())


class SharingCount(NamedTuple):
    n_sharing: int  # users on an RE chosen by at least two users
    n_shared_res: int
    n_empty: int  # empty REs among the N occupied-or-vacated ones: N_c - K_c


def count_sharing_users(alloc, n_res: Optional[int] = None) -> SharingCount:
    a = np.asarray(alloc, dtype=np.intp)
    counts = np.bincount(a, minlength=n_res or 0)
    shared = counts >= 2
    n_c = int(counts[shared].sum())
    k_c = int(shared.sum())
    return SharingCount(n_c, k_c, n_c - k_c)


class PpoaBound(NamedTuple):
    empirical: float  # W(pne) / W_opt
    analytic: float  # lower bound from non-sharing users at their M-th best RE
    optimal: float
    achieved: float


def ppoa_lower_bound(gains: ChannelGains, powers: PowerProfile, weights: Optional[Weights],
                     alloc_pne, m: int) -> PpoaBound:
    n = gains.n_users
    w = np.ones(n) if weights is None else weights.values
    a = game.as_allocation(alloc_pne, gains.n_res)
    achieved = float(np.dot(w, game.rates(gains, powers, a)))
    _, optimal = optimal_assignment(interference_free_rates(gains, powers), weights)
    snr = powers.powers / powers.noise_power
    mth = game.mth_best_power(gains, m)
    best = gains.direct().max(axis=1)
    counts = np.bincount(a, minlength=gains.n_res)
    alone = counts[a] == 1
    numer = float(np.sum(w[alone] * np.log2(1.0 + snr[alone] * mth[alone])))
    denom = float(np.sum(w * np.log2(1.0 + snr * best)))
    return PpoaBound(achieved / optimal, numer / denom, optimal, achieved)
