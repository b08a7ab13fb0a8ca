"""Secret agility sequences and their expansion to per-pulse offsets.

Alice and Bob share a 256-bit key.  Each pulse ``l`` of stream ``stream_id``
gets a PRI offset index ``phi_t[l]`` and a band offset index ``phi_f[l]``
from HMAC-SHA256 used as a counter-mode PRF; because both alphabets are
powers of two, masking the PRF output gives exactly uniform integers.
"""

from __future__ import annotations

import csv
import hashlib
import hmac
import secrets
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .params import ValidatedConfig

_TAG_T = b"T"
_TAG_F = b"F"


@dataclass(frozen=True)
class SecretKey:
    seed: bytes

    def __post_init__(self) -> None:
        if not isinstance(self.seed, (bytes, bytearray)) or len(self.seed) == 0:
            raise ValueError("secret key must be a non-empty byte string")

    @classmethod
    def from_hex(cls, text: str) -> "SecretKey":
        return cls(bytes.fromhex(text.strip()))

    @classmethod
    def generate(cls) -> "SecretKey":
        return cls(secrets.token_bytes(32))

    def hex(self) -> str:
        return self.seed.hex()


@dataclass(frozen=True, eq=False)
class AgilitySchedule:
    """Per-pulse offsets: ``T_l = pri_quantum * phi_t`` and ``f_l = freq_quantum * phi_f``."""

    phi_t: np.ndarray
    phi_f: np.ndarray
    t_offsets_s: np.ndarray
    f_offsets_hz: np.ndarray

    def __len__(self) -> int:
        return len(self.phi_t)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, AgilitySchedule):
            return NotImplemented
        return (np.array_equal(self.phi_t, other.phi_t)
                and np.array_equal(self.phi_f, other.phi_f))

    @classmethod
    def from_indices(cls, phi_t, phi_f, config: ValidatedConfig) -> "AgilitySchedule":
        phi_t = np.array(phi_t, dtype=np.int64)
        phi_f = np.array(phi_f, dtype=np.int64)
        if phi_t.shape != phi_f.shape or phi_t.ndim != 1:
            raise ValueError("phi_t and phi_f must be 1-D and equally long")
        if np.any((phi_t < 0) | (phi_t >= config.time_offset_alphabet)):
            raise ValueError("phi_t outside its alphabet")
        if np.any((phi_f < 0) | (phi_f >= config.freq_offset_alphabet)):
            raise ValueError("phi_f outside its alphabet")
        for a in (phi_t, phi_f):
            a.setflags(write=False)
        t = phi_t * config.pri_quantum_s
        f = phi_f * config.freq_quantum_hz
        t.setflags(write=False)
        f.setflags(write=False)
        return cls(phi_t, phi_f, t, f)

    def pulse_start_sample(self, l: int, config: ValidatedConfig) -> int:
        """First sample of pulse ``l`` in the frame (exact integer arithmetic)."""
        return l * config.samples_per_pri + int(self.phi_t[l]) * config.samples_per_pulse

    def freq_bin_offset(self, l: int, config: ValidatedConfig) -> int:
        """``f_l`` in units of the hop spacing."""
        return int(self.phi_f[l]) * config.num_hops

    def matches(self, other: "AgilitySchedule") -> np.ndarray:
        """Per-pulse boolean: both offsets agree."""
        return (self.phi_t == other.phi_t) & (self.phi_f == other.phi_f)

    def to_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["l", "phi_t", "phi_f", "T_l_s", "f_l_hz"])
            for l in range(len(self)):
                w.writerow([l, int(self.phi_t[l]), int(self.phi_f[l]),
                            repr(float(self.t_offsets_s[l])), repr(float(self.f_offsets_hz[l]))])


def _prf_word(key: bytes, stream_id: int, l: int, tag: bytes) -> int:
    msg = struct.pack(">QQ", stream_id & 0xFFFFFFFFFFFFFFFF, l) + tag
    digest = hmac.new(key, msg, hashlib.sha256).digest()
    return int.from_bytes(digest[:8], "big")


def generate_schedule(key: SecretKey, config: ValidatedConfig, stream_id: int = 0,
                      num_pulses: int | None = None) -> AgilitySchedule:
    """Deterministic schedule for ``(key, stream_id)``; identical at Alice and Bob."""
    L = config.num_pulses if num_pulses is None else num_pulses
    mask_t = config.time_offset_alphabet - 1
    mask_f = config.freq_offset_alphabet - 1
    phi_t = [_prf_word(key.seed, stream_id, l, _TAG_T) & mask_t for l in range(L)]
    phi_f = [_prf_word(key.seed, stream_id, l, _TAG_F) & mask_f for l in range(L)]
    return AgilitySchedule.from_indices(phi_t, phi_f, config)


def adversary_guess_schedule(rng_seed, config: ValidatedConfig,
                             num_pulses: int | None = None) -> AgilitySchedule:
    """Eve's blind guess: uniform offsets, independent of any key."""
    L = config.num_pulses if num_pulses is None else num_pulses
    rng = np.random.default_rng(rng_seed)
    phi_t = rng.integers(0, config.time_offset_alphabet, size=L)
    phi_f = rng.integers(0, config.freq_offset_alphabet, size=L)
    return AgilitySchedule.from_indices(phi_t, phi_f, config)


def zero_schedule(config: ValidatedConfig, num_pulses: int | None = None) -> AgilitySchedule:
    """No agility at all (what a receiver unaware of the offsets assumes)."""
    L = config.num_pulses if num_pulses is None else num_pulses
    return AgilitySchedule.from_indices(np.zeros(L, int), np.zeros(L, int), config)
