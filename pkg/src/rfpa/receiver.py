"""Sparse matched-filter receiver, exhaustive-ML oracle and eavesdropper model.

Per pulse the receiver equalises once with the left pseudo-inverse of the
known channel, then for every chip and antenna picks the single strongest
atom of the length-``n_c`` DFT dictionary (each chip/antenna is exactly
1-sparse in frequency, so one greedy pick is the whole pursuit), converts
the bin to a hop index, factors the hop vector into (subset, permutation),
and matched-filters the antenna sum against the detected tones to recover
amplitude and phase.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field
from math import perm as n_permutations
from typing import NamedTuple, Sequence

import numpy as np

from . import errors
from .codec import (ChipSymbols, PulsePlan, Scheme, alphabets, bits_per_pulse, decode_pulse,
                    default_hop_codes, slice_amplitude, slice_phase)
from .keyschedule import AgilitySchedule, adversary_guess_schedule, zero_schedule
from .params import ValidatedConfig
from .waveform import reference_tones

COND_LIMIT = 1e8
BIN_RESIDUAL_TOL = 0.01
MAX_ML_HYPOTHESES = 10 ** 6

# detector flag bits
FLAG_OUT_OF_RANGE = 1
FLAG_OFF_GRID = 2


class HopDetection(NamedTuple):
    hops: np.ndarray    # legal hop indices (clamped)
    bins: np.ndarray    # argmax DFT bin
    flags: np.ndarray   # FLAG_* bitmask


@dataclass(frozen=True, eq=False)
class ChipDetection:
    hop_estimates: np.ndarray
    mf_outputs: np.ndarray
    bins: np.ndarray
    flags: np.ndarray

    @property
    def amp_estimates(self) -> np.ndarray:
        return np.abs(self.mf_outputs)

    @property
    def phase_estimates(self) -> np.ndarray:
        return np.angle(self.mf_outputs)


@dataclass(frozen=True, eq=False)
class ReceivedPulse:
    plan: PulsePlan
    detections: tuple[ChipDetection, ...] = field(default=())
    erased: bool = False

    @property
    def detector_flagged_chips(self) -> np.ndarray:
        if self.erased:
            return np.ones(len(self.plan), dtype=bool)
        flags = np.zeros(len(self.plan), dtype=bool)
        for q, d in enumerate(self.detections):
            flags[q] = bool(d.flags.any())
        return flags


def equalize(r_window: np.ndarray, H: np.ndarray, cond_limit: float = COND_LIMIT) -> np.ndarray:
    """Zero-forcing estimate ``H^+ r`` of the M transmit streams."""
    N, M = H.shape
    if r_window.shape[0] != N:
        raise errors.DimensionMismatch(f"window has {r_window.shape[0]} rows, H has {N}")
    if N < M:
        raise errors.RankDeficientChannel(f"N = {N} < M = {M}")
    cond = np.linalg.cond(H)
    if not np.isfinite(cond) or cond > cond_limit:
        raise errors.RankDeficientChannel(f"condition number {cond:.3g} above {cond_limit:.3g}")
    return np.linalg.pinv(H) @ r_window


def detect_hops(chips: np.ndarray, config: ValidatedConfig, f_offset_hz: float) -> HopDetection:
    """Hop index per chip/antenna from the peak of the chip DFT.

    ``chips`` has shape (..., n_c).  Bin ``i`` corresponds to ``i*f_s/n_c``;
    the hop index is ``round((i*f_s/n_c - f_l)/df)``.  Indices outside
    0..K-1 are clamped and flagged, as are bins that do not fall on the hop
    grid.
    """
    n_c = config.samples_per_chip
    if chips.shape[-1] != n_c:
        raise errors.DimensionMismatch(f"chip length {chips.shape[-1]} != n_c = {n_c}")
    spectrum = np.fft.fft(chips, axis=-1)   # <Psi_i, rho> for Psi(i,j) = exp(-i 2 pi i j / n_c)
    peak = np.argmax(np.abs(spectrum), axis=-1)
    freq = peak * (config.sample_rate_hz / n_c)
    c_float = (freq - f_offset_hz) / config.hop_spacing_hz
    c = np.rint(c_float).astype(np.int64)
    flags = np.where(np.abs(c_float - c) > BIN_RESIDUAL_TOL, FLAG_OFF_GRID, 0)
    outside = (c < 0) | (c >= config.num_hops)
    flags = flags | np.where(outside, FLAG_OUT_OF_RANGE, 0)
    return HopDetection(np.clip(c, 0, config.num_hops - 1), peak, flags.astype(np.int64))


def matched_filter(chips: np.ndarray, references: np.ndarray) -> np.ndarray:
    """``gamma_m = (1/n_c) sum_n (sum_m' xhat_m'[n]) conj(ref_m[n])``.

    ``chips`` and ``references`` are (..., M, n_c); returns (..., M).
    """
    n_c = chips.shape[-1]
    combined = chips.sum(axis=-2)
    return np.einsum("...n,...mn->...m", combined, references.conj()) / n_c


def exhaustive_ml_detect(chip: np.ndarray, config: ValidatedConfig, f_offset_hz: float,
                         max_hypotheses: int = MAX_ML_HYPOTHESES) -> np.ndarray:
    """Brute-force ML hop vector: minimise ``sum_m ||xhat_m - h_{c_m}||^2`` over all
    ordered M-tuples of distinct hops (every subset and every permutation)."""
    K, M = config.num_hops, config.num_tx
    count = n_permutations(K, M)
    if count > max_hypotheses:
        raise errors.SearchSpaceTooLarge(f"{count} hypotheses exceed the limit {max_hypotheses}")
    offset = int(round(f_offset_hz / config.hop_spacing_hz))
    refs = reference_tones(offset, config)                        # (K, n_c)
    resid = np.sum(np.abs(chip[:, None, :] - refs[None, :, :]) ** 2, axis=-1)   # (M, K)
    hyps = np.array(list(itertools.permutations(range(K), M)), dtype=np.int64).reshape(count, M)
    cost = resid[np.arange(M), hyps].sum(axis=1)
    return hyps[int(np.argmin(cost))]


def ml_hypothesis_count(config: ValidatedConfig) -> int:
    return n_permutations(config.num_hops, config.num_tx)


def receive_pulse(r_window: np.ndarray, H: np.ndarray, f_offset_hz: float,
                  config: ValidatedConfig, scheme: Scheme | str) -> ReceivedPulse:
    """Run the full per-pulse receiver on an ``N x (Q*n_c)`` window.

    PH and AMP use the shared hop assignment instead of detecting it.
    Rank-deficient channels produce an erased pulse instead of an exception.
    """
    scheme = Scheme(scheme)
    Q, M, n_c = config.chips_per_pulse, config.num_tx, config.samples_per_chip
    try:
        xhat = equalize(r_window, H)
    except errors.RankDeficientChannel:
        return _erased(config, scheme)
    chips = xhat.reshape(M, Q, n_c).transpose(1, 0, 2)           # (Q, M, n_c)

    if scheme.uses_index:
        det = detect_hops(chips, config, f_offset_hz)
        hops, bins, flags = det
    else:
        hops = np.broadcast_to(default_hop_codes(config), (Q, M))
        bins = np.full((Q, M), -1)
        flags = np.zeros((Q, M), dtype=np.int64)

    offset = int(round(f_offset_hz / config.hop_spacing_hz))
    refs = reference_tones(offset, config)[hops]                  # (Q, M, n_c)
    gamma = matched_filter(chips, refs)                           # (Q, M)

    levels, points = alphabets(config, scheme)
    amps = levels[slice_amplitude(np.abs(gamma), levels)] if scheme.uses_ask else np.ones((Q, M))
    phases = points[slice_phase(np.angle(gamma), points)] if scheme.uses_psk else np.zeros((Q, M))

    plan_chips = []
    dets = []
    for q in range(Q):
        plan_chips.append(ChipSymbols(amps[q], phases[q], np.array(hops[q])))
        dets.append(ChipDetection(np.array(hops[q]), gamma[q], np.array(bins[q]), np.array(flags[q])))
    return ReceivedPulse(PulsePlan(tuple(plan_chips), scheme), tuple(dets))


def _erased(config: ValidatedConfig, scheme: Scheme) -> ReceivedPulse:
    M = config.num_tx
    chip = ChipSymbols(np.ones(M), np.zeros(M), default_hop_codes(config))
    return ReceivedPulse(PulsePlan((chip,) * config.chips_per_pulse, scheme), (), erased=True)


def pulse_window(samples: np.ndarray, l: int, schedule: AgilitySchedule,
                 config: ValidatedConfig) -> np.ndarray:
    start = schedule.pulse_start_sample(l, config)
    return samples[:, start:start + config.samples_per_pulse]


def receive_frame(samples: np.ndarray, H: np.ndarray, schedule: AgilitySchedule,
                  config: ValidatedConfig, scheme: Scheme | str) -> list[ReceivedPulse]:
    """Receive every pulse of a frame at the offsets given by ``schedule``."""
    return [receive_pulse(pulse_window(samples, l, schedule, config), H[l],
                          float(schedule.f_offsets_hz[l]), config, scheme)
            for l in range(len(schedule))]


def decode_received(rx: ReceivedPulse, config: ValidatedConfig,
                    scheme: Scheme | str) -> tuple[np.ndarray, np.ndarray]:
    """Bits and per-chip flags (detector flags OR codec flags; erasures all flagged)."""
    if rx.erased:
        return np.zeros(bits_per_pulse(config, scheme), np.uint8), np.ones(len(rx.plan), bool)
    bits, codec_flags = decode_pulse(rx.plan, config, scheme)
    return bits, codec_flags | rx.detector_flagged_chips


def trace_rows(l: int, rx: ReceivedPulse) -> list[tuple]:
    """Rows ``(l, q, m, bin, c_hat, |gamma|, angle(gamma), flags)`` for debugging dumps."""
    rows = []
    for q, d in enumerate(rx.detections):
        for m in range(len(d.hop_estimates)):
            rows.append((l, q, m, int(d.bins[m]), int(d.hop_estimates[m]),
                         float(d.amp_estimates[m]), float(d.phase_estimates[m]), int(d.flags[m])))
    return rows


class EveStrategy(str, enum.Enum):
    BLIND_ZERO = "blind-zero"
    BLIND_UNIFORM = "blind-uniform"
    GENIE = "genie"


def eve_schedule(strategy: EveStrategy | str, true_schedule: AgilitySchedule,
                 config: ValidatedConfig, rng_seed=None) -> AgilitySchedule:
    """The schedule Eve processes with: all-zero offsets, a uniform guess, or the truth."""
    strategy = EveStrategy(strategy)
    L = len(true_schedule)
    if strategy is EveStrategy.BLIND_ZERO:
        return zero_schedule(config, L)
    if strategy is EveStrategy.BLIND_UNIFORM:
        return adversary_guess_schedule(rng_seed, config, L)
    return true_schedule


__all__: Sequence[str] = [
    "HopDetection", "ChipDetection", "ReceivedPulse", "equalize", "detect_hops", "matched_filter",
    "exhaustive_ml_detect", "ml_hypothesis_count", "receive_pulse", "receive_frame",
    "decode_received", "pulse_window", "trace_rows", "EveStrategy", "eve_schedule",
]
