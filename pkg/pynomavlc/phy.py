from __future__ import annotations

import math
from dataclasses import dataclass, field
from logging import getLogger
from typing import List, Sequence, Tuple

import numpy as np

from .types import (
    AllocationError,
    AllocationMatrix,
    ChannelMatrix,
    ConfigurationError,
    Pair,
    PairingError,
    PowerSplit,
)


__all__ = [
    "E_OVER_2PI",
    "PowerConfig",
    "NoiseConfig",
    "SubcarrierPlan",
    "LinkConfig",
    "PairTerms",
    "dbm_to_watts",
    "noise_variance",
    "pair_terms",
    "pair_rates",
    "singleton_rate",
    "sinr_table",
]


logger = getLogger(__name__)

# capacity lower bound factor of intensity-modulated channels
E_OVER_2PI = math.e / (2 * math.pi)

_LN2 = math.log(2.0)


def dbm_to_watts(p: float) -> float:
    return 10 ** ((p - 30) / 10)


@dataclass(frozen=True)
class PowerConfig:
    electrical_power_dbm: float = 35.0  # P_e
    electrical_to_optical_ratio: float = 3.2  # iota
    oe_efficiency: float = 0.53  # kappa, A/W

    def __post_init__(self) -> None:
        if not math.isfinite(self.electrical_power_dbm):
            raise ConfigurationError("Electrical power must be finite")
        if self.electrical_to_optical_ratio <= 0 or self.oe_efficiency <= 0:
            raise ConfigurationError("iota and kappa must be positive")

    @property
    def electrical_power_watts(self) -> float:
        return dbm_to_watts(self.electrical_power_dbm)

    @property
    def optical_power(self) -> float:
        """P_o = iota * sqrt(P_e)."""
        return self.electrical_to_optical_ratio * math.sqrt(self.electrical_power_watts)


@dataclass(frozen=True)
class NoiseConfig:
    psd: float = 1e-19  # Z_o, A^2/Hz
    bandwidth: float = 20e6  # B_L, Hz
    subcarrier_count: int = 16  # K

    def __post_init__(self) -> None:
        if self.psd <= 0 or self.bandwidth <= 0:
            raise ConfigurationError("Noise PSD and bandwidth must be positive")
        if self.subcarrier_count < 4 or self.subcarrier_count % 2:
            raise ConfigurationError(
                f"Subcarrier count must be even and at least 4, got {self.subcarrier_count}"
            )


def noise_variance(cfg: NoiseConfig) -> float:
    """sigma_k^2 = Z_o * B_L / K."""
    return cfg.psd * cfg.bandwidth / cfg.subcarrier_count


@dataclass(frozen=True)
class SubcarrierPlan:
    """DCO-OFDM budget: Hermitian symmetry and DC leave K/2 - 1 data subcarriers."""

    total_subcarriers: int
    data_subcarriers: int
    per_subcarrier_optical_power: float

    @classmethod
    def build(cls, power: PowerConfig, noise: NoiseConfig) -> SubcarrierPlan:
        k = noise.subcarrier_count
        return cls(k, k // 2 - 1, power.optical_power / (k - 2))


@dataclass(frozen=True)
class LinkConfig:
    """Everything the rate equations need besides the channel and the allocation."""

    power: PowerConfig = field(default_factory=PowerConfig)
    noise: NoiseConfig = field(default_factory=NoiseConfig)

    @property
    def plan(self) -> SubcarrierPlan:
        return SubcarrierPlan.build(self.power, self.noise)

    @property
    def data_subcarriers(self) -> int:
        return self.noise.subcarrier_count // 2 - 1

    @property
    def noise_variance(self) -> float:
        return noise_variance(self.noise)

    @property
    def subcarrier_bandwidth(self) -> float:
        """B_L / K, the prefactor of every rate sum."""
        return self.noise.bandwidth / self.noise.subcarrier_count

    @property
    def received_scale(self) -> float:
        """kappa^2 * P_{o,k}^2, shared by signal and interference terms."""
        p = self.plan.per_subcarrier_optical_power
        return self.power.oe_efficiency**2 * p**2

    @property
    def noise_floor(self) -> float:
        """iota^2 * sigma_k^2."""
        return self.power.electrical_to_optical_ratio**2 * self.noise_variance


@dataclass(frozen=True, eq=False)
class PairTerms:
    """
    Per-pair, per-subcarrier coefficients of the strong and weak rate equations.

    Rows follow the order of the pairs passed to `pair_terms`. For a pair holding
    power fractions (a_s, a_w) on subcarrier k:

        SINR_s = a_s * strong_snr
        SINR_w = a_w * weak_signal / (weak_floor + a_s * intra)
    """

    mask: np.ndarray  # P x K_d, subcarriers held by the pair
    strong_snr: np.ndarray  # P x K_d
    weak_signal: np.ndarray  # P x K_d, zero for singletons
    weak_floor: np.ndarray  # P x K_d, inter-LED interference plus noise
    intra: np.ndarray  # P x 1, residual strong-user power in the weak SINR
    strong_gain: np.ndarray  # P
    weak_gain: np.ndarray  # P, zero for singletons
    singleton: np.ndarray  # P, bool
    scale: float  # B_L / K

    @property
    def subcarriers(self) -> np.ndarray:
        return self.mask.sum(axis=1)

    def strong_rate(self, a_strong: np.ndarray) -> np.ndarray:
        a = np.asarray(a_strong, dtype=float).reshape(-1, 1)
        spectral = np.log1p(a * self.strong_snr) / _LN2
        return self.scale * np.sum(spectral, axis=1, where=self.mask)

    def weak_rate(self, a_strong: np.ndarray, a_weak: np.ndarray) -> np.ndarray:
        a_s = np.asarray(a_strong, dtype=float).reshape(-1, 1)
        a_w = np.asarray(a_weak, dtype=float).reshape(-1, 1)
        sinr = a_w * self.weak_signal / (self.weak_floor + a_s * self.intra)
        return self.scale * np.sum(np.log1p(sinr) / _LN2, axis=1, where=self.mask)


def _check_pairs(pairs: Sequence[Pair], X: AllocationMatrix, H: ChannelMatrix) -> None:
    if X.n_leds != H.n_leds:
        raise AllocationError(
            f"Allocation has {X.n_leds} LED rows but the channel has {H.n_leds} LEDs"
        )
    for pair in pairs:
        if not 0 <= pair.led < X.n_leds or pair.index < 0:
            raise AllocationError(f"Pair {pair} is out of range")
        for user in pair.users:
            if not 0 <= user < H.n_users:
                raise AllocationError(f"User {user} of pair {pair} is out of range")


def pair_terms(
    pairs: Sequence[Pair], X: AllocationMatrix, H: ChannelMatrix, link: LinkConfig
) -> PairTerms:
    """Builds the rate coefficients of `pairs` under allocation X, vectorized over pairs."""
    _check_pairs(pairs, X, H)
    led = np.array([p.led for p in pairs], dtype=np.int64)
    index = np.array([p.index for p in pairs], dtype=np.int64)
    strong = np.array([p.strong for p in pairs], dtype=np.int64)
    singleton = np.array([p.is_singleton for p in pairs], dtype=bool)
    # singletons borrow the strong user's row; their weak terms are zeroed below
    weak = np.array(
        [p.strong if p.weak is None else p.weak for p in pairs], dtype=np.int64
    )

    gains = H.gains
    occupancy = X.occupancy.astype(float)
    scale_rx = link.received_scale
    noise = link.noise_floor

    mask = X.grid[led] == index[:, None]
    # S_{l_i,k} summed over every LED except the home one
    foreign = np.arange(H.n_leds)[None, :] != led[:, None]
    inter_strong = ((gains[strong] ** 2) * foreign) @ occupancy * scale_rx
    inter_weak = ((gains[weak] ** 2) * foreign) @ occupancy * scale_rx

    h_s = gains[strong, led]
    h_w = np.where(singleton, 0.0, gains[weak, led])

    strong_snr = E_OVER_2PI * (h_s**2 * scale_rx)[:, None] / (inter_strong + noise)
    weak_signal = np.broadcast_to(
        (E_OVER_2PI * h_w**2 * scale_rx)[:, None], mask.shape
    )
    return PairTerms(
        mask=mask,
        strong_snr=strong_snr,
        weak_signal=weak_signal,
        weak_floor=inter_weak + noise,
        intra=(h_s**2 * scale_rx)[:, None],
        strong_gain=h_s,
        weak_gain=h_w,
        singleton=singleton,
        scale=link.subcarrier_bandwidth,
    )


def pair_rates(
    pair: Pair,
    split: PowerSplit,
    X: AllocationMatrix,
    H: ChannelMatrix,
    link: LinkConfig,
) -> Tuple[float, float]:
    """
    Achievable rates (R_s, R_w) of one pair, in bit/s.

    A singleton pair reports R_w = 0.
    """
    if split.a_strong + split.a_weak > 1.0 + 1e-12:
        raise AllocationError(f"Invalid power split {split}")
    terms = pair_terms([pair], X, H, link)
    r_s = terms.strong_rate(np.array([split.a_strong]))[0]
    r_w = terms.weak_rate(np.array([split.a_strong]), np.array([split.a_weak]))[0]
    return float(r_s), float(r_w)


def singleton_rate(
    pair: Pair, X: AllocationMatrix, H: ChannelMatrix, link: LinkConfig
) -> float:
    """Rate of a lone user: the strong-user equation with the whole LED power."""
    if not pair.is_singleton:
        raise PairingError(f"{pair} serves two users; use pair_rates")
    terms = pair_terms([pair], X, H, link)
    return float(terms.strong_rate(np.ones(1))[0])


def sinr_table(
    pairs: Sequence[Pair],
    splits: Sequence[PowerSplit],
    X: AllocationMatrix,
    H: ChannelMatrix,
    link: LinkConfig,
) -> List[Tuple[int, int, int, str, float]]:
    """
    Per-subcarrier SINR of every served user, as rows of
    (led, subcarrier, user, role, sinr). SINRs include the e/2pi factor.
    """
    terms = pair_terms(pairs, X, H, link)
    rows: List[Tuple[int, int, int, str, float]] = []
    for row, (pair, split) in enumerate(zip(pairs, splits)):
        for k in np.flatnonzero(terms.mask[row]):
            sinr_s = split.a_strong * terms.strong_snr[row, k]
            rows.append((pair.led, int(k), pair.strong, "strong", float(sinr_s)))
            if pair.weak is not None:
                sinr_w = (
                    split.a_weak
                    * terms.weak_signal[row, k]
                    / (terms.weak_floor[row, k] + split.a_strong * terms.intra[row, 0])
                )
                rows.append((pair.led, int(k), pair.weak, "weak", float(sinr_w)))
    return rows
