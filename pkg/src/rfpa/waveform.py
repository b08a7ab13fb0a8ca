"""Sampled multi-antenna RFPA baseband synthesis.

Complex baseband is taken relative to the carrier, so a pulse's band sits
in ``[f_l, f_l + K*df)`` inside ``[0, BW)``.  Because ``f_s = n_c * df`` and
``f_l`` is a multiple of ``K*df``, every chip tone lands on an integer DFT
bin ``f_l/df + c`` of a chip-length window, and the phase of sample ``j`` of
chip ``q`` (measured from the pulse start) reduces to ``2*pi*bin*j/n_c``.
Synthesis uses that integer form, which keeps hop orthogonality exact to
rounding.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from . import errors
from .codec import PulsePlan
from .keyschedule import AgilitySchedule
from .params import ValidatedConfig

_MAGIC = b"RFPAFRM1"
_HEADER = struct.Struct("<8sdIQd")  # magic, sample rate, rows, cols, start time


@dataclass(frozen=True, eq=False)
class BasebandFrame:
    """Complex samples, one row per antenna."""

    samples: np.ndarray
    sample_rate_hz: float
    start_time_s: float = 0.0

    @property
    def num_antennas(self) -> int:
        return self.samples.shape[0]

    @property
    def num_samples(self) -> int:
        return self.samples.shape[1]

    def energy(self) -> float:
        return float(np.vdot(self.samples, self.samples).real)

    def to_file(self, path: str | Path) -> None:
        """Header + interleaved little-endian float32 I/Q, row-major."""
        rows, cols = self.samples.shape
        iq = np.empty((rows, cols, 2), dtype="<f4")
        iq[..., 0] = self.samples.real
        iq[..., 1] = self.samples.imag
        with open(path, "wb") as fh:
            fh.write(_HEADER.pack(_MAGIC, self.sample_rate_hz, rows, cols, self.start_time_s))
            fh.write(iq.tobytes())

    @classmethod
    def from_file(cls, path: str | Path) -> "BasebandFrame":
        with open(path, "rb") as fh:
            magic, fs, rows, cols, t0 = _HEADER.unpack(fh.read(_HEADER.size))
            if magic != _MAGIC:
                raise ValueError(f"{path}: not a frame file")
            iq = np.frombuffer(fh.read(), dtype="<f4").reshape(rows, cols, 2)
        return cls(iq[..., 0] + 1j * iq[..., 1], fs, t0)


def _roots(n_c: int) -> np.ndarray:
    return np.exp(2j * np.pi * np.arange(n_c) / n_c)


def chip_tones(bins, n_c: int) -> np.ndarray:
    """Unit tones ``exp(i*2*pi*bin*j/n_c)`` for integer ``bins`` (any shape) -> (..., n_c)."""
    bins = np.asarray(bins, dtype=np.int64)
    j = np.arange(n_c)
    return _roots(n_c)[(bins[..., None] * j) % n_c]


def pulse_signal(plan: PulsePlan, bin_offset: int, config: ValidatedConfig) -> np.ndarray:
    """(M, Q*n_c) samples of one pulse, starting at the pulse start."""
    n_c = config.samples_per_chip
    tones = chip_tones(bin_offset + plan.hop_codes, n_c)      # (Q, M, n_c)
    chips = plan.gains[..., None] * tones
    return chips.transpose(1, 0, 2).reshape(config.num_tx, -1)


def synthesize(plans: Sequence[PulsePlan], schedule: AgilitySchedule,
               config: ValidatedConfig) -> BasebandFrame:
    """Dense transmit frame for L pulses, including the silent part of every PRI."""
    L = len(plans)
    if L != len(schedule):
        raise errors.PlanLengthMismatch(f"{L} plans but {len(schedule)} schedule entries")
    for p in plans:
        if len(p) != config.chips_per_pulse:
            raise errors.PlanLengthMismatch(f"plan has {len(p)} chips, expected {config.chips_per_pulse}")
    out = np.zeros((config.num_tx, L * config.samples_per_pri), dtype=complex)
    width = config.samples_per_pulse
    for l, plan in enumerate(plans):
        start = schedule.pulse_start_sample(l, config)
        out[:, start:start + width] = pulse_signal(plan, schedule.freq_bin_offset(l, config), config)
    return BasebandFrame(out, config.sample_rate_hz)


def synthesize_direct(plans: Sequence[PulsePlan], schedule: AgilitySchedule,
                      config: ValidatedConfig) -> BasebandFrame:
    """Reference synthesis straight from the continuous-time expression.

    Evaluates ``a*exp(i*Omega)*exp(i*2*pi*(f_l + c*df)*(t - l*T_p - T_l))`` on
    ``t_n = n/f_s`` with the rectangular chip window.  Slow; used as a check.
    """
    fs = config.sample_rate_hz
    n_total = len(plans) * config.samples_per_pri
    t = np.arange(n_total) / fs
    out = np.zeros((config.num_tx, n_total), dtype=complex)
    dt, df = config.chip_duration_s, config.hop_spacing_hz
    for l, plan in enumerate(plans):
        t0 = l * config.pri_s + schedule.t_offsets_s[l]
        rel = t - t0
        for q in range(config.chips_per_pulse):
            # half-open window with a small guard against rounding at the edges
            idx = np.flatnonzero((rel >= q * dt - 0.5 / fs) & (rel < (q + 1) * dt - 0.5 / fs))
            for m in range(config.num_tx):
                f = schedule.f_offsets_hz[l] + plan.hop_codes[q, m] * df
                out[m, idx] = plan.gains[q, m] * np.exp(2j * np.pi * f * rel[idx])
    return BasebandFrame(out, fs)


def chip_reference_vector(config: ValidatedConfig, schedule: AgilitySchedule, l: int) -> np.ndarray:
    """The K available FH tones of pulse ``l`` over one chip, shape (K, n_c).

    Row k samples ``exp(i*2*pi*(f_l + k*df)*(t - T_l))``; the same rows apply
    to every chip because each tone completes an integer number of cycles
    per chip.
    """
    if not 0 <= l < len(schedule):
        raise IndexError(f"pulse {l} outside schedule of length {len(schedule)}")
    return reference_tones(schedule.freq_bin_offset(l, config), config)


def reference_tones(bin_offset: int, config: ValidatedConfig) -> np.ndarray:
    return chip_tones(bin_offset + np.arange(config.num_hops), config.samples_per_chip)
