"""Modified fictitious play over per-RE fictitious utilities.

Each user keeps an exponentially smoothed utility ``U[n, k]`` per RE and
plays its argmax. Every ``tau`` turns a user whose measured interference
vector changed since the previous turn clears its fictitious utilities.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace
from typing import Optional, Union

import numpy as np

from . import game
from .game import GameModel, UtilitySpec

# Relative tolerance for ties in U and for the interference-change test.
TIE_TOL = 1e-12
INTERFERENCE_RTOL = 1e-9


class Scheduler(str, enum.Enum):
    SYNCHRONOUS = "synchronous"
    ASYNC_UNIFORM = "async_uniform"


@dataclass(frozen=True)
class FpConfig:
    alpha: Union[float, str] = 0.5
    tau: Optional[int] = 60
    max_turns: int = 500
    scheduler: Scheduler = Scheduler.SYNCHRONOUS
    stable_window: int = 10

    def __post_init__(self):
        object.__setattr__(self, "scheduler", Scheduler(self.scheduler))
        if isinstance(self.alpha, str):
            if self.alpha != "1/(t+1)":
                raise ValueError("alpha schedule must be a constant or '1/(t+1)'")
        elif not 0 < self.alpha <= 1:
            raise ValueError("alpha must lie in (0, 1]")
        if self.tau is not None and self.tau <= 0:
            raise ValueError("tau must be positive (or None to disable)")
        if self.max_turns < 1:
            raise ValueError("max_turns must be >= 1")
        if self.stable_window < 1:
            raise ValueError("stable_window must be >= 1")

    def step_size(self, t: int) -> float:
        if isinstance(self.alpha, str):
            return 1.0 / (t + 1)
        return float(self.alpha)

    def window(self, n_users: int) -> int:
        if self.scheduler is Scheduler.ASYNC_UNIFORM:
            return self.stable_window * n_users
        return self.stable_window


@dataclass
class FpState:
    fictitious: np.ndarray  # (N, K)
    alloc: np.ndarray  # (N,)
    turn: int
    prev_interference: np.ndarray  # (N, K), last interference each user measured
    user_turns: np.ndarray = field(default=None)  # turns each user has acted

    def __post_init__(self):
        if self.user_turns is None:
            self.user_turns = np.full(len(self.alloc), self.turn, dtype=np.int64)

    def copy(self) -> "FpState":
        return FpState(self.fictitious.copy(), self.alloc.copy(), self.turn,
                       self.prev_interference.copy(), self.user_turns.copy())


@dataclass(frozen=True)
class TraceRecord:
    turn: int
    sum_rate: float
    min_rate: float
    n_sharing: int
    converged: bool = False


@dataclass
class RunResult:
    converged: bool
    convergence_turn: Optional[int]
    final_alloc: np.ndarray
    trace: list
    state: FpState


def _as_model(gains, powers, spec) -> GameModel:
    if isinstance(spec, GameModel):
        return spec
    return GameModel(gains, powers, spec)


def fp_init(gains, powers, spec: UtilitySpec, config: FpConfig, rng: np.random.Generator,
            alloc=None) -> FpState:
    """Random initial allocation and ``U[n, k](0) = u_n(k, a_{-n}(0))``."""
    model = _as_model(gains, powers, spec)
    n, k = model.n_users, model.n_res
    if alloc is None:
        alloc = rng.integers(0, k, size=n)
    alloc = game.as_allocation(alloc, k).copy()
    inter = game.interference_matrix(model.gains, model.powers, alloc)
    return FpState(model.from_interference(inter), alloc, 0, inter)


def _choose(row: np.ndarray, previous: int, rng: np.random.Generator) -> int:
    top = row.max()
    ties = np.flatnonzero(row >= top - TIE_TOL * max(1.0, abs(top)))
    if ties.size == 1:
        return int(ties[0])
    if previous in ties:
        return int(previous)
    return int(rng.choice(ties))


def _changed(new: np.ndarray, old: np.ndarray) -> np.ndarray:
    """Per-row flag: some entry differs beyond the relative tolerance."""
    scale = np.maximum(np.abs(new), np.abs(old))
    return np.any(np.abs(new - old) > INTERFERENCE_RTOL * scale, axis=-1)


def fp_step(state: FpState, gains, powers, spec, config: FpConfig,
            rng: np.random.Generator) -> FpState:
    """One turn of modified fictitious play; returns a new state."""
    model = _as_model(gains, powers, spec)
    t = state.turn + 1
    alpha = config.step_size(t)
    fict = state.fictitious
    prev_alloc = state.alloc

    if config.scheduler is Scheduler.SYNCHRONOUS:
        alloc = np.array([_choose(fict[n], prev_alloc[n], rng) for n in range(len(prev_alloc))])
        inter = game.interference_matrix(model.gains, model.powers, alloc)
        new_fict = (1 - alpha) * fict + alpha * model.from_interference(inter)
        user_turns = state.user_turns + 1
        if config.tau is not None and t % config.tau == 0:
            reset = _changed(inter, state.prev_interference)
            new_fict[reset] = 0.0
        return FpState(new_fict, alloc, t, inter, user_turns)

    n = int(rng.integers(model.n_users))
    alloc = prev_alloc.copy()
    alloc[n] = _choose(fict[n], prev_alloc[n], rng)
    inter_n = _user_interference(model, alloc, n)
    new_fict = fict.copy()
    user_turns = state.user_turns.copy()
    user_turns[n] += 1
    alpha = config.step_size(int(user_turns[n]))
    new_fict[n] = (1 - alpha) * fict[n] + alpha * model.from_interference(inter_n[None], [n])[0]
    prev_inter = state.prev_interference.copy()
    if config.tau is not None and user_turns[n] % config.tau == 0:
        if _changed(inter_n, prev_inter[n]):
            new_fict[n] = 0.0
    prev_inter[n] = inter_n
    return FpState(new_fict, alloc, t, prev_inter, user_turns)


def _user_interference(model: GameModel, alloc: np.ndarray, n: int) -> np.ndarray:
    others = np.ones(len(alloc), dtype=bool)
    others[n] = False
    contrib = model.powers.powers[others] * model.gains.power[others, n, alloc[others]]
    return np.bincount(alloc[others], weights=contrib, minlength=model.n_res)


def argmax_consistent(state: FpState) -> bool:
    """Every user's current RE is a maximiser of its fictitious utility."""
    fict = state.fictitious
    top = fict.max(axis=1)
    held = fict[np.arange(len(state.alloc)), state.alloc]
    return bool(np.all(held >= top - TIE_TOL * np.maximum(1.0, np.abs(top))))


def _record(model: GameModel, alloc: np.ndarray, t: int, weights, converged=False) -> TraceRecord:
    from .matching import count_sharing_users

    r = game.rates(model.gains, model.powers, alloc)
    total = float(r.sum()) if weights is None else float(np.dot(weights.values, r))
    return TraceRecord(t, total, float(r.min()), count_sharing_users(alloc, model.n_res).n_sharing,
                       converged)


def run(gains, powers, spec, config: FpConfig, rng: np.random.Generator, *,
        init_alloc=None, weights=None, state: Optional[FpState] = None,
        trace: bool = True) -> RunResult:
    """Iterate fictitious play until a verified stable PNE or ``max_turns``.

    Convergence is declared once the allocation has not changed for the
    stable window (``stable_window`` turns, times N when asynchronous), is a
    PNE, and every user's held RE maximises its fictitious utility. The
    reported convergence turn is the first turn of that stable stretch.
    """
    model = _as_model(gains, powers, spec)
    if state is None:
        state = fp_init(model.gains, model.powers, model, config, rng, alloc=init_alloc)
    window = config.window(model.n_users)
    records = [_record(model, state.alloc, state.turn, weights)] if trace else []
    stable_since = state.turn
    start = state.turn

    while True:
        if state.turn - stable_since >= window and argmax_consistent(state):
            if game.is_pne(model.gains, model.powers, state.alloc, model.spec, model):
                if trace:
                    records[-1] = replace(records[-1], converged=True)
                return RunResult(True, stable_since, state.alloc.copy(), records, state)
        if state.turn - start >= config.max_turns:
            return RunResult(False, None, state.alloc.copy(), records, state)
        new = fp_step(state, model.gains, model.powers, model, config, rng)
        if not np.array_equal(new.alloc, state.alloc):
            stable_since = new.turn
        state = new
        if trace:
            records.append(_record(model, state.alloc, state.turn, weights))


def extend(result: RunResult, gains, powers, spec, config: FpConfig, rng: np.random.Generator,
           turns: int = 100) -> np.ndarray:
    """Play ``turns`` more turns from a finished run; returns the allocation history."""
    model = _as_model(gains, powers, spec)
    state = result.state
    history = []
    for _ in range(turns):
        state = fp_step(state, model.gains, model.powers, model, config, rng)
        history.append(state.alloc.copy())
    return np.array(history)
