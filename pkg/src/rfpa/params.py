"""System parameters, validation and the sampling plan.

All quantities are SI base units (Hz, s).  The defaults are the desk-scale
reference point: f_c = 10 GHz, BW = 200 MHz, K = 10 hops, tau = 2 us,
Q = 10 chips, M = N = 8, J_ASK = 2, J_PSK = 4, critically sampled at
f_s = BW, and T_p = 17 tau so that the PRI-offset alphabet has 16 entries.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

from . import errors

_REL_TOL = 1e-9


@dataclass(frozen=True)
class SystemConfig:
    """Raw (unvalidated) waveform, array and modulation parameters."""

    carrier_freq_hz: float = 10e9
    bandwidth_hz: float = 200e6
    num_hops: int = 10
    pulse_duration_s: float = 2e-6
    chips_per_pulse: int = 10
    num_tx: int = 8
    num_rx: int = 8
    num_pulses: int = 50
    pri_s: float = 34e-6
    ask_order: int = 2
    psk_order: int = 4
    sample_rate_hz: float = 200e6
    # None means "derive from the other parameters"
    time_offset_alphabet: int | None = None
    freq_offset_alphabet: int | None = None

    def replace(self, **changes: Any) -> "SystemConfig":
        # a replaced ValidatedConfig must be revalidated, so always go raw
        raw = {f.name: getattr(self, f.name) for f in dataclasses.fields(SystemConfig)}
        raw.update(changes)
        return SystemConfig(**raw)

    def to_dict(self) -> dict[str, Any]:
        return {f.name: getattr(self, f.name) for f in dataclasses.fields(SystemConfig)}


@dataclass(frozen=True)
class SamplingPlan:
    samples_per_chip: int
    samples_per_pulse: int
    samples_per_pri: int


@dataclass(frozen=True)
class ValidatedConfig(SystemConfig):
    """A :class:`SystemConfig` that passed every invariant, plus derived values.

    Construct through :func:`validate`.  Instances are immutable and safe to
    share between workers.
    """

    chip_duration_s: float = field(init=False)
    hop_spacing_hz: float = field(init=False)
    samples_per_chip: int = field(init=False)
    samples_per_pulse: int = field(init=False)
    samples_per_pri: int = field(init=False)
    pri_quantum_s: float = field(init=False)
    freq_quantum_hz: float = field(init=False)

    def __post_init__(self) -> None:
        _check_positive(self)
        plan = derive_sampling(self)
        dt = self.pulse_duration_s / self.chips_per_pulse
        df = 1.0 / dt
        K, Q, M, N = self.num_hops, self.chips_per_pulse, self.num_tx, self.num_rx

        if self.sample_rate_hz < self.bandwidth_hz * (1 - _REL_TOL):
            raise errors.SampleRateTooLow(
                f"f_s = {self.sample_rate_hz:g} Hz is below BW = {self.bandwidth_hz:g} Hz")
        if K * df > self.bandwidth_hz * (1 + _REL_TOL):
            raise errors.BandwidthExceeded(
                f"K*df = {K * df:g} Hz exceeds BW = {self.bandwidth_hz:g} Hz")
        if M > K:
            raise errors.TooManyTxAntennas(f"M = {M} > K = {K}; embedding needs M <= K")
        if M * Q < K:
            raise errors.TooFewTxAntennas(f"M = {M} < K/Q = {K / Q:g}")
        if N < M:
            raise errors.TooFewRxAntennas(f"N = {N} < M = {M}; no left pseudo-inverse")

        phi_t = _near_int(self.pri_s / self.pulse_duration_s, "T_p/tau") - 1
        phi_f = _near_int(self.bandwidth_hz / (K * df), "BW/(K*df)")
        for name, value, given in (
            ("time_offset_alphabet", phi_t, self.time_offset_alphabet),
            ("freq_offset_alphabet", phi_f, self.freq_offset_alphabet),
        ):
            if not is_power_of_two(value):
                raise errors.NonPowerOfTwoAlphabet(f"{name} = {value} is not a power of two")
            if given is not None and given != value:
                raise errors.AlphabetMismatch(
                    f"{name} = {given} but the other parameters imply {value}")

        put = object.__setattr__
        put(self, "time_offset_alphabet", phi_t)
        put(self, "freq_offset_alphabet", phi_f)
        put(self, "chip_duration_s", dt)
        put(self, "hop_spacing_hz", df)
        put(self, "samples_per_chip", plan.samples_per_chip)
        put(self, "samples_per_pulse", plan.samples_per_pulse)
        put(self, "samples_per_pri", plan.samples_per_pri)
        put(self, "pri_quantum_s", Q * dt)
        put(self, "freq_quantum_hz", K * df)

    @property
    def prf_hz(self) -> float:
        return 1.0 / self.pri_s

    @property
    def sampling(self) -> SamplingPlan:
        return SamplingPlan(self.samples_per_chip, self.samples_per_pulse, self.samples_per_pri)

    @property
    def frame_samples(self) -> int:
        return self.num_pulses * self.samples_per_pri

    def describe(self) -> dict[str, Any]:
        """Raw fields and derived quantities as a JSON-friendly dict."""
        out = self.to_dict()
        out.update(
            chip_duration_s=self.chip_duration_s,
            hop_spacing_hz=self.hop_spacing_hz,
            samples_per_chip=self.samples_per_chip,
            samples_per_pulse=self.samples_per_pulse,
            samples_per_pri=self.samples_per_pri,
            pri_quantum_s=self.pri_quantum_s,
            freq_quantum_hz=self.freq_quantum_hz,
            prf_hz=self.prf_hz,
        )
        return out


def is_power_of_two(n: int) -> bool:
    return isinstance(n, int) and n > 0 and n & (n - 1) == 0


def _near_int(x: float, what: str, exc: type[errors.ConfigError] = errors.NonIntegerAlphabet) -> int:
    n = round(x)
    if n <= 0 or abs(x - n) > _REL_TOL * max(1.0, abs(x)):
        raise exc(f"{what} = {x!r} is not a positive integer")
    return int(n)


def _check_positive(config: SystemConfig) -> None:
    for f in dataclasses.fields(SystemConfig):
        value = getattr(config, f.name)
        if value is None:
            continue
        if not isinstance(value, (int, float)) or isinstance(value, bool) or not value > 0:
            raise errors.NonPositiveParameter(f"{f.name} must be positive, got {value!r}")
        if f.type in ("int", "int | None") and int(value) != value:
            raise errors.NonPositiveParameter(f"{f.name} must be an integer, got {value!r}")


def derive_sampling(config: SystemConfig) -> SamplingPlan:
    """Samples per chip, pulse and PRI; the chip length must be an exact integer."""
    dt = config.pulse_duration_s / config.chips_per_pulse
    n_c = _near_int(config.sample_rate_hz * dt, "f_s*dt", errors.NonIntegerChipLength)
    per_pulse = config.chips_per_pulse * n_c
    return SamplingPlan(n_c, per_pulse, round(config.sample_rate_hz * config.pri_s))


def validate(config: SystemConfig) -> ValidatedConfig:
    """Check every invariant and return the immutable validated configuration."""
    return ValidatedConfig(**config.to_dict())


def default_config(**overrides: Any) -> ValidatedConfig:
    return validate(SystemConfig(**overrides))


def config_from_mapping(data: Mapping[str, Any]) -> SystemConfig:
    known = {f.name for f in dataclasses.fields(SystemConfig)}
    unknown = set(data) - known
    if unknown:
        raise errors.ConfigError(f"unknown config keys: {sorted(unknown)}")
    return SystemConfig(**data)


def load_config(path: str | Path) -> SystemConfig:
    with open(path) as fh:
        return config_from_mapping(json.load(fh))


def small_af_config(**overrides: Any) -> ValidatedConfig:
    """Tiny instance (M=2, L=2, Q=2, K=4, n_c=8) used to cross-check the AF."""
    base = dict(
        bandwidth_hz=8e6, num_hops=4, pulse_duration_s=2e-6, chips_per_pulse=2,
        num_tx=2, num_rx=2, num_pulses=2, pri_s=10e-6, ask_order=2, psk_order=4,
        sample_rate_hz=8e6,
    )
    base.update(overrides)
    return validate(SystemConfig(**base))


def log2_floor(n: int) -> int:
    """floor(log2(n)) for a positive integer, exact for arbitrarily large n."""
    if n < 1:
        raise ValueError("log2_floor needs n >= 1")
    return n.bit_length() - 1


__all__ = [
    "SystemConfig", "ValidatedConfig", "SamplingPlan", "validate", "derive_sampling",
    "default_config", "load_config", "config_from_mapping", "small_af_config",
    "is_power_of_two", "log2_floor",
]
