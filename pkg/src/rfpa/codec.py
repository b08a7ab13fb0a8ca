"""Bit <-> chip-symbol mapping for the PH, AMP, SIM and HYB embedding schemes.

Per-chip bit layout (MSB first), fixed for interoperability::

    [selection rank : b_sel] [permutation rank : b_perm]
    [antenna 0: ASK bits, PSK bits] [antenna 1: ASK bits, PSK bits] ...

Fields a scheme does not use have width zero.  The selection rank picks an
M-subset of the K hops in colex order, the permutation rank (Lehmer code,
lexicographic) assigns the subset's elements to antennas, so that antenna
``m`` hops on ``subset[perm[m]]``.  Only the first ``2**b`` ranks of each
codebook are used.

ASK levels are ``{1..J_ASK}`` divided by their rms, PSK phases are
``2*pi*k/J_PSK``; both are Gray-mapped (symbol ``k`` carries bits
``k ^ (k >> 1)``).  With J_PSK = 4: 00 -> 0, 01 -> pi/2, 11 -> pi, 10 -> 3pi/2.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from math import comb, factorial, pi
from typing import NamedTuple, Sequence

import numpy as np

from . import errors
from .combinatorics import (bits_to_int, gray, gray_inverse, int_to_bits, rank_permutation,
                            rank_subset, unrank_permutation, unrank_subset)
from .params import SystemConfig, ValidatedConfig, log2_floor

TWO_PI = 2 * pi
MAX_HOPS = 1024


class Scheme(str, enum.Enum):
    PH = "PH"
    AMP = "AMP"
    SIM = "SIM"
    HYB = "HYB"

    @property
    def uses_index(self) -> bool:
        return self in (Scheme.SIM, Scheme.HYB)

    @property
    def uses_ask(self) -> bool:
        return self in (Scheme.AMP, Scheme.HYB)

    @property
    def uses_psk(self) -> bool:
        return self in (Scheme.PH, Scheme.HYB)


class BitsPerChip(NamedTuple):
    sel: int
    perm: int
    ask: int
    psk: int

    @property
    def total(self) -> int:
        return self.sel + self.perm + self.ask + self.psk


@dataclass(frozen=True, eq=False)
class ChipSymbols:
    amplitudes: np.ndarray
    phases: np.ndarray
    hop_codes: np.ndarray
    selection_rank: int | None = None
    permutation_rank: int | None = None

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ChipSymbols):
            return NotImplemented
        return (np.array_equal(self.hop_codes, other.hop_codes)
                and np.allclose(self.amplitudes, other.amplitudes, rtol=0, atol=1e-12)
                and np.allclose(self.phases, other.phases, rtol=0, atol=1e-12))


@dataclass(frozen=True, eq=False)
class PulsePlan:
    chips: tuple[ChipSymbols, ...]
    scheme: Scheme

    def __len__(self) -> int:
        return len(self.chips)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PulsePlan):
            return NotImplemented
        return self.scheme == other.scheme and self.chips == other.chips

    @property
    def amplitudes(self) -> np.ndarray:
        """(Q, M)"""
        return np.stack([c.amplitudes for c in self.chips])

    @property
    def phases(self) -> np.ndarray:
        return np.stack([c.phases for c in self.chips])

    @property
    def hop_codes(self) -> np.ndarray:
        return np.stack([c.hop_codes for c in self.chips])

    @property
    def gains(self) -> np.ndarray:
        """Complex chip gains ``a * exp(i*Omega)``, shape (Q, M)."""
        return self.amplitudes * np.exp(1j * self.phases)


# --- alphabets -------------------------------------------------------------

def ask_levels(order: int) -> np.ndarray:
    """All J_ASK amplitude levels, normalised to unit average power."""
    levels = np.arange(1, order + 1, dtype=float)
    return levels / np.sqrt(np.mean(levels ** 2))


def psk_phases(order: int) -> np.ndarray:
    return TWO_PI * np.arange(order) / order


def bits_per_chip(config: SystemConfig, scheme: Scheme | str) -> BitsPerChip:
    scheme = Scheme(scheme)
    K, M = config.num_hops, config.num_tx
    if M > K:
        raise errors.TooManyTxAntennas(f"M = {M} > K = {K}")
    if K > MAX_HOPS:
        raise errors.OverflowGuard(f"K = {K} exceeds the supported {MAX_HOPS} hops")
    return BitsPerChip(
        sel=log2_floor(comb(K, M)) if scheme.uses_index else 0,
        perm=log2_floor(factorial(M)) if scheme.uses_index else 0,
        ask=M * log2_floor(config.ask_order) if scheme.uses_ask else 0,
        psk=M * log2_floor(config.psk_order) if scheme.uses_psk else 0,
    )


def bits_per_pulse(config: SystemConfig, scheme: Scheme | str) -> int:
    return config.chips_per_pulse * bits_per_chip(config, scheme).total


def achievable_rate(config: SystemConfig, scheme: Scheme | str) -> float:
    """Bits per second: ``PRF * Q * (active bits per chip)``."""
    return bits_per_pulse(config, scheme) / config.pri_s


def alphabets(config: ValidatedConfig, scheme: Scheme | str) -> tuple[np.ndarray, np.ndarray]:
    """The amplitude levels and phases a scheme actually transmits."""
    layout = _Layout(config, Scheme(scheme))
    return layout.levels, layout.phase_points


def default_hop_codes(config: ValidatedConfig) -> np.ndarray:
    """The shared hop assignment used by PH and AMP (ranks 0, 0)."""
    return np.arange(config.num_tx, dtype=np.int64)


# --- encoding --------------------------------------------------------------

class _Layout:
    """Per-config constants reused across chips."""

    def __init__(self, config: ValidatedConfig, scheme: Scheme):
        self.config = config
        self.scheme = scheme
        self.K, self.M = config.num_hops, config.num_tx
        self.widths = bits_per_chip(config, scheme)
        self.b_ask = log2_floor(config.ask_order) if scheme.uses_ask else 0
        self.b_psk = log2_floor(config.psk_order) if scheme.uses_psk else 0
        self.levels = ask_levels(config.ask_order)[: 1 << self.b_ask]
        self.phase_points = psk_phases(config.psk_order)[: 1 << self.b_psk]


def encode_chip(bits: Sequence[int], layout: _Layout) -> ChipSymbols:
    w = layout.widths
    pos = 0
    sel = bits_to_int(bits[pos:pos + w.sel]); pos += w.sel
    prm = bits_to_int(bits[pos:pos + w.perm]); pos += w.perm
    subset = unrank_subset(sel, layout.K, layout.M)
    perm = unrank_permutation(prm, layout.M)
    hops = np.array([subset[p] for p in perm], dtype=np.int64)

    amps = np.ones(layout.M)
    phases = np.zeros(layout.M)
    for m in range(layout.M):
        if layout.b_ask:
            k = gray_inverse(bits_to_int(bits[pos:pos + layout.b_ask])); pos += layout.b_ask
            amps[m] = layout.levels[k]
        if layout.b_psk:
            k = gray_inverse(bits_to_int(bits[pos:pos + layout.b_psk])); pos += layout.b_psk
            phases[m] = layout.phase_points[k]
    return ChipSymbols(amps, phases, hops, sel, prm)


def encode_pulse(bits, config: ValidatedConfig, scheme: Scheme | str) -> tuple[PulsePlan, int]:
    """Map the leading bits of ``bits`` onto one pulse; returns ``(plan, bits_consumed)``."""
    scheme = Scheme(scheme)
    layout = _Layout(config, scheme)
    per_chip = layout.widths.total
    need = per_chip * config.chips_per_pulse
    bits = np.asarray(bits, dtype=np.uint8)
    if bits.size < need:
        raise errors.InsufficientBits(f"need {need} bits for one pulse, got {bits.size}")
    chips = tuple(encode_chip(bits[q * per_chip:(q + 1) * per_chip].tolist(), layout)
                  for q in range(config.chips_per_pulse))
    return PulsePlan(chips, scheme), need


def encode_payload(bits, config: ValidatedConfig, scheme: Scheme | str) -> list[PulsePlan]:
    """Encode an arbitrary-length payload; the last pulse is zero-padded."""
    per_pulse = bits_per_pulse(config, scheme)
    if per_pulse == 0:
        raise errors.ZeroRateScheme(f"{Scheme(scheme).value} carries no bits with this config")
    bits = np.asarray(bits, dtype=np.uint8)
    n_pulses = -(-bits.size // per_pulse)
    padded = np.zeros(n_pulses * per_pulse, dtype=np.uint8)
    padded[:bits.size] = bits
    return [encode_pulse(padded[i * per_pulse:(i + 1) * per_pulse], config, scheme)[0]
            for i in range(n_pulses)]


# --- decoding --------------------------------------------------------------

def factor_hops(hops: Sequence[int], K: int) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """Split hop codes into (sorted subset, permutation) so that ``hops[m] = subset[perm[m]]``."""
    hops = [int(h) for h in hops]
    if any(h < 0 or h >= K for h in hops):
        raise errors.InvalidHopSet(f"hop codes {hops} outside 0..{K - 1}")
    if len(set(hops)) != len(hops):
        raise errors.InvalidHopSet(f"duplicate hop codes {hops}")
    subset = tuple(sorted(hops))
    where = {h: i for i, h in enumerate(subset)}
    return subset, tuple(where[h] for h in hops)


def slice_amplitude(amplitude: np.ndarray, levels: np.ndarray) -> np.ndarray:
    """Index of the nearest level for each amplitude."""
    return np.argmin(np.abs(np.asarray(amplitude)[..., None] - levels), axis=-1)


def slice_phase(phase: np.ndarray, points: np.ndarray) -> np.ndarray:
    d = np.angle(np.exp(1j * (np.asarray(phase)[..., None] - points)))
    return np.argmin(np.abs(d), axis=-1)


def decode_chip(chip: ChipSymbols, layout: _Layout) -> tuple[list[int], bool]:
    """Bits for one chip and whether it was flagged (flagged chips decode to zeros)."""
    w = layout.widths
    out: list[int] = []
    if layout.scheme.uses_index:
        try:
            subset, perm = factor_hops(chip.hop_codes, layout.K)
        except errors.InvalidHopSet:
            return [0] * w.total, True
        sel, prm = rank_subset(subset), rank_permutation(perm)
        if sel >> w.sel or prm >> w.perm:
            # outside the truncated codebook
            return [0] * w.total, True
        out += int_to_bits(sel, w.sel) + int_to_bits(prm, w.perm)

    ask_idx = slice_amplitude(chip.amplitudes, layout.levels) if layout.b_ask else None
    psk_idx = slice_phase(chip.phases, layout.phase_points) if layout.b_psk else None
    for m in range(layout.M):
        if layout.b_ask:
            out += int_to_bits(gray(int(ask_idx[m])), layout.b_ask)
        if layout.b_psk:
            out += int_to_bits(gray(int(psk_idx[m])), layout.b_psk)
    return out, False


def decode_pulse(plan: PulsePlan, config: ValidatedConfig,
                 scheme: Scheme | str | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Inverse of :func:`encode_pulse` for a (possibly noisy) plan estimate.

    Returns the bit vector and a per-chip flag array.  Flagged chips (hop
    codes with duplicates or outside the codebook) are zero-filled.
    """
    scheme = Scheme(scheme if scheme is not None else plan.scheme)
    layout = _Layout(config, scheme)
    bits: list[int] = []
    flags = np.zeros(len(plan.chips), dtype=bool)
    for q, chip in enumerate(plan.chips):
        chip_bits, flags[q] = decode_chip(chip, layout)
        bits += chip_bits
    return np.array(bits, dtype=np.uint8), flags


def decode_payload(plans: Sequence[PulsePlan], config: ValidatedConfig,
                   scheme: Scheme | str, n_bits: int) -> np.ndarray:
    parts = [decode_pulse(p, config, scheme)[0] for p in plans]
    return np.concatenate(parts)[:n_bits] if parts else np.zeros(0, np.uint8)


def dump_tables(config: ValidatedConfig, max_entries: int = 1 << 16) -> dict:
    """Codebook tables for cross-implementation checks (JSON-friendly)."""
    K, M = config.num_hops, config.num_tx
    w = bits_per_chip(config, Scheme.HYB)
    b_ask, b_psk = log2_floor(config.ask_order), log2_floor(config.psk_order)
    levels, phases = ask_levels(config.ask_order), psk_phases(config.psk_order)
    n_sel, n_perm = min(1 << w.sel, max_entries), min(1 << w.perm, max_entries)
    return {
        "num_hops": K,
        "num_tx": M,
        "bits_per_chip": {s.value: bits_per_chip(config, s)._asdict() for s in Scheme},
        "bit_order": ["selection", "permutation", "per-antenna: ask, psk"],
        "ask": [{"bits": format(gray(k), f"0{b_ask}b") if b_ask else "", "level": float(levels[k])}
                for k in range(1 << b_ask)],
        "psk": [{"bits": format(gray(k), f"0{b_psk}b") if b_psk else "", "phase_rad": float(phases[k])}
                for k in range(1 << b_psk)],
        "subsets": [list(unrank_subset(r, K, M)) for r in range(n_sel)],
        "permutations": [list(unrank_permutation(r, M)) for r in range(n_perm)],
        "truncated": n_sel < (1 << w.sel) or n_perm < (1 << w.perm),
    }
