"""Quasi-static Rayleigh wiretap channel with AWGN at Bob and Eve."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import errors
from .codec import Scheme, bits_per_pulse
from .params import ValidatedConfig
from .waveform import BasebandFrame


class Party(str, enum.Enum):
    BOB = "bob"
    EVE = "eve"


@dataclass(frozen=True, eq=False)
class ChannelRealization:
    """Per-pulse N x M matrices for both links and the two noise powers."""

    h_bob: np.ndarray          # (L, N, M)
    h_eve: np.ndarray          # (L, N, M)
    noise_power_bob: float
    noise_power_eve: float

    def matrices(self, party: Party | str) -> np.ndarray:
        return self.h_bob if Party(party) is Party.BOB else self.h_eve

    def noise_power(self, party: Party | str) -> float:
        return self.noise_power_bob if Party(party) is Party.BOB else self.noise_power_eve

    def save(self, path: str | Path) -> None:
        np.savez(path, h_bob=self.h_bob, h_eve=self.h_eve,
                 noise_power_bob=self.noise_power_bob, noise_power_eve=self.noise_power_eve)

    @classmethod
    def load(cls, path: str | Path) -> "ChannelRealization":
        with np.load(path) as z:
            return cls(z["h_bob"], z["h_eve"], float(z["noise_power_bob"]), float(z["noise_power_eve"]))


def complex_gaussian(rng: np.random.Generator, shape, variance: float = 1.0) -> np.ndarray:
    """i.i.d. circular CN(0, variance)."""
    scale = np.sqrt(variance / 2)
    return scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


def draw_realization(config: ValidatedConfig, rng: np.random.Generator,
                     noise_power_bob: float, noise_power_eve: float | None = None,
                     num_pulses: int | None = None) -> ChannelRealization:
    """Fresh CN(0,1) matrices per pulse for both links.

    Eve's noise power defaults to Bob's.
    """
    L = config.num_pulses if num_pulses is None else num_pulses
    shape = (L, config.num_rx, config.num_tx)
    h_bob = complex_gaussian(rng, shape)
    h_eve = complex_gaussian(rng, shape)
    if noise_power_eve is None:
        noise_power_eve = noise_power_bob
    return ChannelRealization(h_bob, h_eve, float(noise_power_bob), float(noise_power_eve))


def apply(frame: BasebandFrame, realization: ChannelRealization, party: Party | str,
          rng: np.random.Generator | None, config: ValidatedConfig) -> BasebandFrame:
    """``r = H_l x + v`` sample by sample; ``H_l`` covers the whole PRI of pulse ``l``."""
    H = realization.matrices(party)
    L, N, M = H.shape
    spp = config.samples_per_pri
    if frame.num_antennas != M:
        raise errors.DimensionMismatch(f"frame has {frame.num_antennas} rows, channel expects {M}")
    if frame.num_samples != L * spp:
        raise errors.DimensionMismatch(
            f"frame has {frame.num_samples} samples, {L} pulses need {L * spp}")
    x = frame.samples.reshape(M, L, spp)
    r = np.einsum("lnm,mls->nls", H, x).reshape(N, L * spp)
    sigma2 = realization.noise_power(party)
    if sigma2 > 0:
        if rng is None:
            raise ValueError("an rng is required when the noise power is non-zero")
        r = r + complex_gaussian(rng, r.shape, sigma2)
    return BasebandFrame(r, frame.sample_rate_hz, frame.start_time_s)


def pulse_energy(config: ValidatedConfig) -> float:
    """Average transmit energy of one pulse summed over antennas (sample domain)."""
    return float(config.num_tx * config.samples_per_pulse)


def noise_power_from_ebn0(config: ValidatedConfig, scheme: Scheme | str, ebn0_db: float) -> float:
    """Per-sample noise variance: ``sigma^2 = (E_pulse / bits_per_pulse) / 10**(EbN0/10)``.

    ``E_pulse = M * Q * n_c`` (unit average chip power on every antenna).
    ``ebn0_db = inf`` gives a noiseless channel.
    """
    bpp = bits_per_pulse(config, scheme)
    if bpp == 0:
        raise errors.ZeroRateScheme(f"{Scheme(scheme).value} carries no bits with this config")
    eb = pulse_energy(config) / bpp
    return float(eb / 10 ** (ebn0_db / 10))
