"""Network geometry, path loss and random channel-gain tensors.

Gains are stored as an ``(N, N, K)`` array indexed ``[tx, rx, re]``, so
``magnitudes[m, n, k]`` is the fading amplitude from transmitter ``m`` to
receiver ``n`` on resource element ``k``. All indices are zero-based.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

SPEED_OF_LIGHT = 3e8

# Extended Pedestrian A tap table (3GPP TS 36.104 Annex B).
EPA_DELAYS_NS = (0.0, 30.0, 70.0, 90.0, 110.0, 190.0, 410.0)
EPA_POWERS_DB = (0.0, -1.0, -2.0, -3.0, -8.0, -17.2, -20.8)
EPA_DELAY_SPREAD = 143e-9


@dataclass(frozen=True)
class NetworkGeometry:
    receiver_positions: np.ndarray  # (N, 2) meters
    transmitter_positions: np.ndarray  # (N, 2) meters
    disk_radius: float

    @property
    def n_users(self) -> int:
        return len(self.receiver_positions)

    def distances(self) -> np.ndarray:
        """``r[m, n]``: distance from transmitter m to receiver n."""
        diff = self.transmitter_positions[:, None, :] - self.receiver_positions[None, :, :]
        return np.hypot(diff[..., 0], diff[..., 1])


@dataclass(frozen=True)
class PathLossModel:
    exponent: float = 3.0
    wavelength: float = SPEED_OF_LIGHT / 2.4e9

    def __post_init__(self):
        if self.exponent <= 0:
            raise ValueError("path-loss exponent must be positive")
        if self.wavelength <= 0:
            raise ValueError("wavelength must be positive")

    @property
    def antenna_constant(self) -> float:
        return (self.wavelength / (4 * math.pi)) ** self.exponent

    def mean_power(self, distance):
        distance = np.asarray(distance, dtype=float)
        if np.any(distance <= 0):
            raise ValueError("transmitter and receiver positions coincide")
        return self.antenna_constant / distance**self.exponent


class FadingKind(str, enum.Enum):
    IID_RAYLEIGH = "iid_rayleigh"
    M_DEPENDENT_TAPS = "m_dependent_taps"


@dataclass(frozen=True)
class FadingSpec:
    kind: FadingKind = FadingKind.IID_RAYLEIGH
    dependency_order: int = 0
    tap_delays: tuple = ()
    tap_powers_db: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "kind", FadingKind(self.kind))
        if self.dependency_order < 0:
            raise ValueError("dependency order must be non-negative")
        if self.kind is FadingKind.IID_RAYLEIGH and self.dependency_order != 0:
            raise ValueError("i.i.d. Rayleigh fading has dependency order 0")
        if len(self.tap_delays) != len(self.tap_powers_db):
            raise ValueError("tap delay and tap power lists differ in length")
        if self.kind is FadingKind.M_DEPENDENT_TAPS and not self.tap_delays:
            raise ValueError("m-dependent fading needs at least one tap")


def dependency_order(symbol_duration: float, n_bins: int, delay_spread: float) -> int:
    """Number of neighbouring REs inside one coherence bandwidth.

    The coherence bandwidth is taken as ``1 / (50 * delay_spread)`` and the
    RE spacing as ``1 / (n_bins * symbol_duration)``.
    """
    if symbol_duration <= 0 or delay_spread <= 0 or n_bins < 1:
        raise ValueError("symbol duration, delay spread and bin count must be positive")
    return int(math.floor(symbol_duration * n_bins / (50.0 * delay_spread) + 1e-9))


def epa_spec(symbol_duration: float = 0.44e-6, n_bins: int = 50,
             delay_spread: float = EPA_DELAY_SPREAD) -> FadingSpec:
    """EPA tap profile with the dependency order implied by the RE grid."""
    return FadingSpec(
        kind=FadingKind.M_DEPENDENT_TAPS,
        dependency_order=dependency_order(symbol_duration, n_bins, delay_spread),
        tap_delays=tuple(d * 1e-9 for d in EPA_DELAYS_NS),
        tap_powers_db=EPA_POWERS_DB,
    )


@dataclass(frozen=True)
class ChannelGains:
    magnitudes: np.ndarray  # (N, N, K), |h[m, n, k]|
    mean_powers: np.ndarray  # (N, N), E|h[m, n, k]|^2
    power: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        mags = np.asarray(self.magnitudes, dtype=float)
        if mags.ndim != 3 or mags.shape[0] != mags.shape[1]:
            raise ValueError("magnitudes must have shape (N, N, K)")
        if np.any(mags <= 0):
            raise ValueError("channel magnitudes must be strictly positive")
        object.__setattr__(self, "magnitudes", mags)
        object.__setattr__(self, "mean_powers", np.asarray(self.mean_powers, dtype=float))
        object.__setattr__(self, "power", mags**2)

    @classmethod
    def from_power(cls, power, mean_powers=None) -> "ChannelGains":
        power = np.asarray(power, dtype=float)
        if mean_powers is None:
            mean_powers = power.mean(axis=2)
        return cls(np.sqrt(power), mean_powers)

    @property
    def n_users(self) -> int:
        return self.magnitudes.shape[0]

    @property
    def n_res(self) -> int:
        return self.magnitudes.shape[2]

    def direct(self) -> np.ndarray:
        """``(N, K)`` direct power gains ``|h[n, n, k]|^2``."""
        idx = np.arange(self.n_users)
        return self.power[idx, idx, :]


@dataclass(frozen=True)
class PowerProfile:
    powers: np.ndarray
    noise_power: float = 1.0

    def __post_init__(self):
        powers = np.asarray(self.powers, dtype=float)
        if np.any(powers <= 0):
            raise ValueError("transmit powers must be positive")
        if self.noise_power <= 0:
            raise ValueError("noise power must be positive")
        object.__setattr__(self, "powers", powers)


def generate_geometry(n: int, disk_radius: float, link_mean: float, link_std: float,
                      rng: np.random.Generator, min_link: float = 1.0) -> NetworkGeometry:
    """Receivers uniform on a disk, each transmitter at a normal random distance."""
    if n < 1:
        raise ValueError("need at least one user")
    if disk_radius <= 0:
        raise ValueError("disk radius must be positive")
    if link_std < 0:
        raise ValueError("link distance std must be non-negative")
    radius = disk_radius * np.sqrt(rng.uniform(size=n))
    theta = rng.uniform(0.0, 2 * np.pi, size=n)
    rx = np.column_stack([radius * np.cos(theta), radius * np.sin(theta)])
    link = np.maximum(rng.normal(link_mean, link_std, size=n), min_link)
    phi = rng.uniform(0.0, 2 * np.pi, size=n)
    tx = rx + np.column_stack([link * np.cos(phi), link * np.sin(phi)])
    return NetworkGeometry(rx, tx, float(disk_radius))


def mean_channel_power(geometry: NetworkGeometry, model: PathLossModel, tx: int, rx: int) -> float:
    d = geometry.transmitter_positions[tx] - geometry.receiver_positions[rx]
    return float(model.mean_power(math.hypot(d[0], d[1])))


def mean_power_matrix(geometry: NetworkGeometry, model: PathLossModel) -> np.ndarray:
    return model.mean_power(geometry.distances())


def _exponential_power(shape, rng) -> np.ndarray:
    # Exponential(1) bounded away from zero so |h| > 0 holds in floating point.
    return np.maximum(rng.standard_exponential(shape), np.finfo(float).tiny)


def sample_iid_gains(geometry: NetworkGeometry, model: PathLossModel, n: int, k: int,
                     rng: np.random.Generator) -> ChannelGains:
    """Independent Rayleigh amplitudes, ``|h|^2 ~ Exp(mean = lambda[m, n])``."""
    if n < 1 or k < 1:
        raise ValueError("n and k must be positive")
    if geometry.n_users != n:
        raise ValueError("geometry has a different number of users")
    lam = mean_power_matrix(geometry, model)
    power = lam[:, :, None] * _exponential_power((n, n, k), rng)
    return ChannelGains(np.sqrt(power), lam)


def m_dependent_response(n_seq: int, k: int, m: int, rng: np.random.Generator) -> np.ndarray:
    """Unit-power complex frequency responses that are exactly m-dependent over k.

    Each RE response is the normalised sum of ``m + 1`` consecutive
    independent CN(0, 1) sub-band components. This is the DFT over ``k + m``
    bins of a dense tapped-delay line whose power-delay profile is the
    squared Dirichlet kernel of width ``m + 1``; truncating to ``k`` bins
    removes the circular wrap, so REs more than ``m`` apart share no
    component. Returns shape ``(n_seq, k)``.
    """
    z = (rng.standard_normal((n_seq, k + m)) + 1j * rng.standard_normal((n_seq, k + m))) / np.sqrt(2)
    csum = np.concatenate([np.zeros((n_seq, 1), complex), np.cumsum(z, axis=1)], axis=1)
    return (csum[:, m + 1:] - csum[:, :k]) / np.sqrt(m + 1)


def tdl_frequency_response(tap_delays, tap_powers_db, freqs, rng: np.random.Generator,
                           n_seq: int = 1) -> np.ndarray:
    """DFT of a tapped-delay line with independent CN(0, p_l) taps at ``freqs`` (Hz)."""
    delays = np.asarray(tap_delays, dtype=float)
    if delays.size == 0:
        raise ValueError("empty tap list")
    p = 10.0 ** (np.asarray(tap_powers_db, dtype=float) / 10.0)
    p = p / p.sum()
    taps = np.sqrt(p / 2) * (rng.standard_normal((n_seq, delays.size))
                             + 1j * rng.standard_normal((n_seq, delays.size)))
    phase = np.exp(-2j * np.pi * np.outer(delays, np.asarray(freqs, dtype=float)))
    return taps @ phase


def sample_mdependent_gains(spec: FadingSpec, geometry: NetworkGeometry, model: PathLossModel,
                            n: int, k: int, rng: np.random.Generator) -> ChannelGains:
    """Direct gains m-dependent over REs, cross gains i.i.d. Rayleigh."""
    if spec.kind is not FadingKind.M_DEPENDENT_TAPS:
        raise ValueError("spec is not an m-dependent tap model")
    if not spec.tap_delays:
        raise ValueError("empty tap list")
    gains = sample_iid_gains(geometry, model, n, k, rng)
    power = gains.power.copy()
    idx = np.arange(n)
    if len(spec.tap_delays) == 1:
        # a single tap has a flat frequency response
        h = tdl_frequency_response(spec.tap_delays, spec.tap_powers_db, np.zeros(k), rng, n)
    else:
        h = m_dependent_response(n, k, spec.dependency_order, rng)
    direct = np.maximum(np.abs(h) ** 2, np.finfo(float).tiny)
    power[idx, idx, :] = gains.mean_powers[idx, idx][:, None] * direct
    return ChannelGains(np.sqrt(power), gains.mean_powers)


def powers_for_target_snr(gains: ChannelGains, noise: float, target_snr_db: float) -> PowerProfile:
    """Per-user power giving mean interference-free SNR ``target_snr_db``."""
    if noise <= 0:
        raise ValueError("noise power must be positive")
    direct_mean = np.diag(gains.mean_powers)
    if np.any(direct_mean <= 0):
        raise ValueError("zero mean direct channel power")
    return PowerProfile(noise * 10.0 ** (target_snr_db / 10.0) / direct_mean, noise)
