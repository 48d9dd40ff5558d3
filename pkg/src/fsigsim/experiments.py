"""Monte Carlo orchestration of the channel-allocation experiments."""

from __future__ import annotations

import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, fields
from typing import Optional

import numpy as np

from . import channel, dynamics, game, matching, orderstats
from .channel import ChannelGains, FadingKind, PowerProfile
from .config import ScenarioConfig

log = logging.getLogger(__name__)

JOBS_ENV = "FSIGSIM_JOBS"


@dataclass
class ExperimentRecord:
    seed: int
    n_users: int
    m_best: int
    converged: bool = False
    convergence_turn: Optional[int] = None
    sum_rate: float = float("nan")
    min_rate: float = float("nan")
    n_sharing: int = -1
    optimal_sum_rate: float = float("nan")
    optimal_min_rate: float = float("nan")
    random_perm_sum_rate: float = float("nan")
    random_perm_min_rate: float = float("nan")
    ppoa_empirical: float = float("nan")
    ppoa_bound: float = float("nan")
    absorption_ok: Optional[bool] = None
    final_alloc: str = ""
    error: str = ""

    @classmethod
    def field_names(cls) -> list:
        return [f.name for f in fields(cls)]

    def alloc(self) -> np.ndarray:
        return np.array([int(x) for x in self.final_alloc.split()], dtype=np.intp)


@dataclass
class Instance:
    gains: ChannelGains
    powers: PowerProfile
    geometry: channel.NetworkGeometry


def seed_streams(seed: int) -> dict:
    """Independent generators per component, all derived from one root seed."""
    names = ("geometry", "gains", "dynamics", "baseline")
    children = np.random.SeedSequence(seed).spawn(len(names))
    return {name: np.random.default_rng(s) for name, s in zip(names, children)}


def build_instance(config: ScenarioConfig, seed: int) -> Instance:
    rngs = seed_streams(seed)
    g = config.geometry
    n, k = config.n_users, config.k
    geo = channel.generate_geometry(n, g.disk_radius, g.link_mean, g.link_std, rngs["geometry"],
                                    g.min_link)
    fading = config.fading.spec(k)
    if fading.kind is FadingKind.IID_RAYLEIGH:
        gains = channel.sample_iid_gains(geo, g.pathloss(), n, k, rngs["gains"])
    else:
        gains = channel.sample_mdependent_gains(fading, geo, g.pathloss(), n, k, rngs["gains"])
    powers = channel.powers_for_target_snr(gains, config.noise_power, config.snr_db)
    return Instance(gains, powers, geo)


def run_realization(config: ScenarioConfig, seed: int) -> ExperimentRecord:
    rec = ExperimentRecord(seed, config.n_users, config.m)
    try:
        _fill(rec, config, seed)
    except Exception as exc:  # recorded per seed, batch continues
        log.exception("realization %s failed", seed)
        rec.error = f"{type(exc).__name__}: {exc}"
    return rec


def _fill(rec: ExperimentRecord, config: ScenarioConfig, seed: int) -> None:
    inst = build_instance(config, seed)
    rngs = seed_streams(seed)
    weights = config.weight_vector()
    spec = config.utility_spec()
    fp = config.fp.config()
    model = game.GameModel(inst.gains, inst.powers, spec)
    result = dynamics.run(inst.gains, inst.powers, model, fp, rngs["dynamics"], weights=weights,
                          trace=False)
    a = result.final_alloc
    r = game.rates(inst.gains, inst.powers, a)
    w = np.ones(config.n_users) if weights is None else weights.values
    rec.converged = result.converged
    rec.convergence_turn = result.convergence_turn
    rec.sum_rate = float(np.dot(w, r))
    rec.min_rate = float(r.min())
    rec.n_sharing = matching.count_sharing_users(a, config.k).n_sharing
    rec.final_alloc = " ".join(map(str, a.tolist()))

    free = matching.interference_free_rates(inst.gains, inst.powers)
    if config.n_users <= config.k:
        opt_alloc, opt_value = matching.optimal_assignment(free, weights)
        rec.optimal_sum_rate = opt_value
        rec.optimal_min_rate = float(free[np.arange(config.n_users), opt_alloc].min())
        perm = rngs["baseline"].permutation(config.k)[: config.n_users]
        rp = game.rates(inst.gains, inst.powers, perm)
        rec.random_perm_sum_rate = float(np.dot(w, rp))
        rec.random_perm_min_rate = float(rp.min())
        rec.ppoa_empirical = opt_value / rec.sum_rate
        if spec.kind is game.UtilityKind.MFSIG:
            rec.ppoa_bound = matching.ppoa_lower_bound(inst.gains, inst.powers, weights, a,
                                                       spec.m_best).analytic
    if result.converged and config.absorption_turns > 0:
        history = dynamics.extend(result, inst.gains, inst.powers, model, fp, rngs["dynamics"],
                                  config.absorption_turns)
        rec.absorption_ok = bool(np.all(history == a[None, :]))


def resolve_jobs(jobs: Optional[int] = None) -> int:
    if jobs is not None:
        return max(1, int(jobs))
    return max(1, int(os.environ.get(JOBS_ENV, "1")))


def run_scenario(config: ScenarioConfig, jobs: Optional[int] = None) -> list:
    """One record per seed, sorted by seed regardless of completion order."""
    seeds = config.seed_list()
    jobs = resolve_jobs(jobs)
    if jobs == 1 or len(seeds) <= 1:
        records = [run_realization(config, s) for s in seeds]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            records = list(pool.map(run_realization, [config] * len(seeds), seeds))
    return sorted(records, key=lambda r: r.seed)


def verify_record(config: ScenarioConfig, record: ExperimentRecord) -> bool:
    """Regenerate the instance and re-check that the stored allocation is a PNE."""
    inst = build_instance(config, record.seed)
    return game.is_pne(inst.gains, inst.powers, record.alloc(), config.utility_spec()).is_pne


def single_run_trace(config: ScenarioConfig, seed: int):
    """Per-turn trace of one realization plus its optimal sum/min rate."""
    inst = build_instance(config, seed)
    rngs = seed_streams(seed)
    result = dynamics.run(inst.gains, inst.powers, config.utility_spec(), config.fp.config(),
                          rngs["dynamics"], weights=config.weight_vector())
    free = matching.interference_free_rates(inst.gains, inst.powers)
    opt_alloc, opt_value = matching.optimal_assignment(free, config.weight_vector())
    return result, opt_value, float(free[np.arange(config.n_users), opt_alloc].min())


def convergence_cdf(records, max_turns: Optional[int] = None) -> list:
    """``(turn, fraction converged by turn)`` steps; unconverged runs never count."""
    if not records:
        raise ValueError("need at least one record")
    n = len(records)
    turns = sorted(r.convergence_turn for r in records if r.converged)
    table = []
    for i, t in enumerate(turns):
        if i + 1 < len(turns) and turns[i + 1] == t:
            continue
        table.append((int(t), (i + 1) / n))
    if max_turns is not None and len(turns) < n:
        table.append((int(max_turns), len(turns) / n))
    return table


def fraction_converged_by(records, turn: int) -> float:
    return sum(1 for r in records if r.converged and r.convergence_turn <= turn) / len(records)


@dataclass
class RatesRow:
    n_users: int
    m_best: int
    mean_rate: float
    mean_rate_std: float
    min_rate: float
    min_rate_std: float
    optimal_mean_rate: float
    optimal_mean_rate_std: float
    optimal_min_rate: float
    random_mean_rate: float
    random_mean_rate_std: float
    random_min_rate: float
    random_min_rate_std: float
    converged_fraction: float
    mean_sharing: float


def summarize_rates(records, n_users: int, m_best: int) -> RatesRow:
    ok = [r for r in records if not r.error]
    conv = [r for r in ok if r.converged] or ok

    def stat(values):
        v = np.asarray(values, dtype=float)
        return float(np.mean(v)), float(np.std(v))

    mean_rate = stat([r.sum_rate / n_users for r in conv])
    min_rate = stat([r.min_rate for r in conv])
    opt = stat([r.optimal_sum_rate / n_users for r in ok])
    rnd = stat([r.random_perm_sum_rate / n_users for r in ok])
    rnd_min = stat([r.random_perm_min_rate for r in ok])
    return RatesRow(n_users, m_best, *mean_rate, *min_rate, *opt,
                    float(np.mean([r.optimal_min_rate for r in ok])), *rnd, *rnd_min,
                    sum(r.converged for r in ok) / max(1, len(ok)),
                    float(np.mean([r.n_sharing for r in conv])))


def rates_vs_n(configs, jobs: Optional[int] = None) -> list:
    """Mean/min rate summary per N, with optimal and random-permutation baselines."""
    rows = []
    for cfg in configs:
        records = run_scenario(cfg, jobs)
        rows.append(summarize_rates(records, cfg.n_users, cfg.m))
    return rows


@dataclass
class MatchingRow:
    n: int
    m: int
    mode: str
    trials: int
    perfect_fraction: float


def matching_study(n: int, m: int, trials: int, base_seed: int = 0) -> list:
    """Perfect-matching frequency in M-best and M-worst graphs of i.i.d. gains."""
    rows = []
    for mode in matching.GraphMode:
        hits = 0
        for seed in range(base_seed, base_seed + trials):
            rng = np.random.default_rng(np.random.SeedSequence(seed).spawn(1)[0])
            direct = rng.standard_exponential((n, n))
            power = np.ones((n, n, n))
            power[np.arange(n), np.arange(n), :] = direct
            graph = matching.build_graph(ChannelGains.from_power(power), m, mode)
            hits += matching.has_perfect_matching(graph)
        rows.append(MatchingRow(n, m, mode.value, trials, hits / trials))
    return rows


@dataclass
class OrderStatsRow:
    family: str
    k: int
    m: int
    trials: int
    mean_ratio: float
    p05_ratio: float
    upper_bound: float
    upper_coverage: float
    lower_bound: Optional[float]
    lower_coverage: Optional[float]


def orderstats_study(ks, m_rule, trials: int, seed: int = 0, families=None) -> list:
    """Ratio ``X_(K-M+1)/X_(K)`` and bound coverage for each family and K."""
    families = families or {"exponential": orderstats.Exponential(), "rayleigh": orderstats.Rayleigh()}
    rows = []
    for f_idx, (name, dist) in enumerate(families.items()):
        for k in ks:
            m = m_rule(k)
            rng = np.random.default_rng([seed, f_idx, k])
            stats = orderstats.empirical_ratio(dist, k, m, trials, rng)
            lower = cov_l = None
            if np.e**2 * m / k < 1:
                cov_u, cov_l = orderstats.bound_coverage(dist, k, m, trials, rng)
                lower = orderstats.intermediate_bound(dist, k, m)
            else:
                cov_u, _ = orderstats.bound_coverage(dist, k, 1, trials, rng)
            rows.append(OrderStatsRow(name, k, m, trials, stats.mean, stats.p05,
                                      orderstats.extreme_bound(dist, k), cov_u, lower, cov_l))
    return rows
