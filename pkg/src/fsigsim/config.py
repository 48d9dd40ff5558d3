"""Scenario configuration, loaded from nested YAML mappings."""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import yaml

from .channel import FadingKind, FadingSpec, PathLossModel, epa_spec
from .dynamics import FpConfig
from .game import UtilitySpec, Weights


@dataclass(frozen=True)
class GeometryParams:
    disk_radius: float = 1000.0
    link_mean: float = 50.0
    link_std: float = 25.0
    min_link: float = 1.0
    pathloss_exponent: float = 3.0
    wavelength: float = 3e8 / 2.4e9

    def pathloss(self) -> PathLossModel:
        return PathLossModel(self.pathloss_exponent, self.wavelength)


@dataclass(frozen=True)
class FadingParams:
    kind: str = "iid_rayleigh"
    preset: Optional[str] = None  # "epa"
    dependency_order: Optional[int] = None
    tap_delays: tuple = ()
    tap_powers_db: tuple = ()
    symbol_duration: float = 0.44e-6

    def spec(self, n_res: int) -> FadingSpec:
        if self.preset == "epa":
            base = epa_spec(self.symbol_duration, n_res)
            if self.dependency_order is not None:
                base = dataclasses.replace(base, dependency_order=self.dependency_order)
            return base
        if self.preset is not None:
            raise ValueError(f"unknown fading preset {self.preset!r}")
        return FadingSpec(FadingKind(self.kind), self.dependency_order or 0,
                          tuple(self.tap_delays), tuple(self.tap_powers_db))


@dataclass(frozen=True)
class FpParams:
    alpha: object = 0.5
    tau: Optional[int] = 60
    max_turns: int = 500
    scheduler: str = "synchronous"
    stable_window: int = 10

    def config(self) -> FpConfig:
        return FpConfig(self.alpha, self.tau, self.max_turns, self.scheduler, self.stable_window)


@dataclass(frozen=True)
class ScenarioConfig:
    name: str = "default"
    n_users: int = 50
    n_res: Optional[int] = None
    m_best: Optional[int] = None
    m_coeff: float = 3.0
    utility: str = "mfsig"
    snr_db: float = 15.0
    noise_power: float = 1.0
    weights: Optional[tuple] = None
    base_seed: int = 0
    n_realizations: int = 100
    seeds: Optional[tuple] = None
    absorption_turns: int = 0
    geometry: GeometryParams = field(default_factory=GeometryParams)
    fading: FadingParams = field(default_factory=FadingParams)
    fp: FpParams = field(default_factory=FpParams)

    def __post_init__(self):
        if self.n_users < 1 or (self.n_res is not None and self.n_res < 1):
            raise ValueError("user and RE counts must be positive")
        if self.n_realizations < 0:
            raise ValueError("n_realizations must be non-negative")
        if self.weights is not None and len(self.weights) != self.n_users:
            raise ValueError("need one weight per user")

    @property
    def k(self) -> int:
        return self.n_res if self.n_res is not None else self.n_users

    @property
    def m(self) -> int:
        if self.m_best is not None:
            return self.m_best
        return min(self.k, max(1, math.ceil(self.m_coeff * math.log(self.n_users))))

    def utility_spec(self) -> UtilitySpec:
        if self.utility == "naive":
            return UtilitySpec.naive()
        return UtilitySpec.mfsig(self.m)

    def weight_vector(self) -> Optional[Weights]:
        return None if self.weights is None else Weights.of(self.weights)

    def seed_list(self) -> list:
        if self.seeds is not None:
            return [int(s) for s in self.seeds]
        return list(range(self.base_seed, self.base_seed + self.n_realizations))

    def with_(self, **changes) -> "ScenarioConfig":
        """Copy with top-level fields replaced; nested groups accept dicts."""
        for key, cls in (("geometry", GeometryParams), ("fading", FadingParams), ("fp", FpParams)):
            if isinstance(changes.get(key), dict):
                changes[key] = dataclasses.replace(getattr(self, key), **changes[key])
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["resolved"] = {"n_res": self.k, "m_best": self.m}
        return _plain(d)

    @classmethod
    def from_dict(cls, data: dict) -> "ScenarioConfig":
        data = dict(data or {})
        data.pop("resolved", None)
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        for key, sub in (("geometry", GeometryParams), ("fading", FadingParams), ("fp", FpParams)):
            if key in data and not isinstance(data[key], sub):
                data[key] = _sub_from_dict(sub, data[key] or {})
        for key in ("weights", "seeds"):
            if data.get(key) is not None:
                data[key] = tuple(data[key])
        return cls(**data)


def _sub_from_dict(cls, data: dict):
    known = {f.name for f in dataclasses.fields(cls)}
    unknown = set(data) - known
    if unknown:
        raise ValueError(f"unknown {cls.__name__} keys: {sorted(unknown)}")
    data = {k: tuple(v) if isinstance(v, list) else v for k, v in data.items()}
    return cls(**data)


def _plain(obj):
    if isinstance(obj, dict):
        return {k: _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    return obj


def load_config(path) -> ScenarioConfig:
    with open(path) as fh:
        return ScenarioConfig.from_dict(yaml.safe_load(fh))


def dump_config(config: ScenarioConfig, path) -> None:
    Path(path).write_text(yaml.safe_dump(config.to_dict(), sort_keys=False))


def default_scenario(n_users: int = 50, **changes) -> ScenarioConfig:
    """Default simulation network: 15 dB SNR, 1 km disk, alpha 0.5, tau 60."""
    return ScenarioConfig(n_users=n_users).with_(**changes)
