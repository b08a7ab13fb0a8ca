"""Experiment orchestration: BER sweeps, rate sweeps, secrecy proxy and AF jobs.

Every random draw comes from a ``SeedSequence`` keyed by
``(seed, scheme, point, trial)``, so outputs depend only on the experiment settings and
seed, never on the number of worker threads or their scheduling.
"""

from __future__ import annotations

import csv
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from . import __version__, errors
from .ambiguity import AFGrid, af_expectation, af_grid
from .channel import Party, apply, draw_realization, noise_power_from_ebn0
from .codec import Scheme, achievable_rate, bits_per_chip, bits_per_pulse, encode_payload
from .keyschedule import SecretKey, generate_schedule
from .params import SystemConfig, ValidatedConfig, small_af_config, validate
from .receiver import EveStrategy, decode_received, eve_schedule, receive_frame, trace_rows
from .waveform import synthesize

CSV_SCHEMA_VERSION = 1
SCHEME_ORDER = (Scheme.PH, Scheme.AMP, Scheme.SIM, Scheme.HYB)
MIN_REPORTED_BITS = 1000
MAX_AF_WORK = 2_000_000     # grid points x pulses


@dataclass(frozen=True)
class ExperimentSpec:
    config: SystemConfig
    scheme: Scheme | str
    ebn0_grid_db: tuple[float, ...] = (0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0)
    trials: int = 1
    bits_min: int = 10_000
    seed: int = 0
    eve_strategy: EveStrategy | str = EveStrategy.BLIND_UNIFORM
    threads: int = 1

    def __post_init__(self) -> None:
        object.__setattr__(self, "scheme", Scheme(self.scheme))
        object.__setattr__(self, "eve_strategy", EveStrategy(self.eve_strategy))
        object.__setattr__(self, "ebn0_grid_db", tuple(float(x) for x in self.ebn0_grid_db))
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.bits_min < MIN_REPORTED_BITS:
            raise ValueError(f"bits_min must be >= {MIN_REPORTED_BITS}")
        if self.threads < 1:
            raise ValueError("threads must be >= 1")

    def trials_per_point(self) -> int:
        """Enough whole trials to reach ``bits_min`` (payload size is fixed per trial)."""
        cfg = validate(self.config)
        per_trial = bits_per_pulse(cfg, self.scheme) * cfg.num_pulses
        if per_trial == 0:
            return self.trials
        return max(self.trials, math.ceil(self.bits_min / per_trial))

    def to_dict(self) -> dict:
        return {
            "config": self.config.to_dict(),
            "scheme": self.scheme.value, "ebn0_grid_db": list(self.ebn0_grid_db),
            "trials": self.trials, "bits_min": self.bits_min, "seed": self.seed,
            "eve_strategy": self.eve_strategy.value,
        }


@dataclass(frozen=True)
class BerPoint:
    scheme: str
    ebn0_db: float
    ber_bob: float
    ber_eve: float
    bits_counted: int
    errors_bob: int
    errors_eve: int
    flagged_chips: int
    trials: int
    aborted: bool = False
    note: str = ""


class TrialCounts(NamedTuple):
    bits: int
    errors_bob: int
    errors_eve: int
    flagged_chips: int

    def __add__(self, other):  # type: ignore[override]
        return TrialCounts(*(a + b for a, b in zip(self, other)))


def _decode_all(rx, config, scheme) -> tuple[np.ndarray, int]:
    bits, flagged = [], 0
    for pulse in rx:
        b, f = decode_received(pulse, config, scheme)
        bits.append(b)
        flagged += int(np.count_nonzero(f))
    return np.concatenate(bits), flagged


def run_trial(config: ValidatedConfig, scheme: Scheme, ebn0_db: float, strategy: EveStrategy,
              seq: np.random.SeedSequence, trace: list | None = None) -> TrialCounts:
    """One frame end to end: bits, keyed schedule, both links, both receivers.

    If ``trace`` is a list, Bob's per-chip detection rows are appended to it.
    """
    s_bits, s_key, s_chan, s_bob, s_eve, s_guess = seq.spawn(6)
    L = config.num_pulses
    tx_bits = np.random.default_rng(s_bits).integers(0, 2, L * bits_per_pulse(config, scheme), dtype=np.uint8)
    plans = encode_payload(tx_bits, config, scheme)
    key = SecretKey(np.random.default_rng(s_key).bytes(32))
    schedule = generate_schedule(key, config)
    frame = synthesize(plans, schedule, config)

    sigma2 = noise_power_from_ebn0(config, scheme, ebn0_db)
    chan = draw_realization(config, np.random.default_rng(s_chan), sigma2)
    r_bob = apply(frame, chan, Party.BOB, np.random.default_rng(s_bob), config)
    r_eve = apply(frame, chan, Party.EVE, np.random.default_rng(s_eve), config)

    bob_rx = receive_frame(r_bob.samples, chan.h_bob, schedule, config, scheme)
    if trace is not None:
        for l, rx in enumerate(bob_rx):
            trace.extend(trace_rows(l, rx))
    bob_bits, flagged = _decode_all(bob_rx, config, scheme)
    eve_sched = eve_schedule(strategy, schedule, config, s_guess)
    eve_bits, _ = _decode_all(receive_frame(r_eve.samples, chan.h_eve, eve_sched, config, scheme),
                              config, scheme)
    return TrialCounts(tx_bits.size, int(np.count_nonzero(bob_bits != tx_bits)),
                       int(np.count_nonzero(eve_bits != tx_bits)), flagged)


def trial_seed(seed: int, scheme: Scheme, point: int, trial: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(seed, spawn_key=(SCHEME_ORDER.index(scheme), point, trial))


def run_ber_sweep(spec: ExperimentSpec) -> list[BerPoint]:
    """BER for Bob and Eve at every grid point; a failing point is marked, not fatal."""
    config = validate(spec.config)
    scheme, strategy = spec.scheme, spec.eve_strategy
    n_trials = spec.trials_per_point()
    points = []
    with ThreadPoolExecutor(max_workers=spec.threads) as pool:
        for p, ebn0 in enumerate(spec.ebn0_grid_db):
            futures = [pool.submit(run_trial, config, scheme, ebn0, strategy,
                                   trial_seed(spec.seed, scheme, p, t)) for t in range(n_trials)]
            try:
                total = TrialCounts(0, 0, 0, 0)
                for fut in futures:
                    total = total + fut.result()
            except errors.RfpaError as exc:
                for fut in futures:
                    fut.cancel()
                points.append(BerPoint(scheme.value, ebn0, math.nan, math.nan, 0, 0, 0, 0, n_trials,
                                       True, f"{type(exc).__name__}: {exc}"))
                continue
            points.append(BerPoint(scheme.value, ebn0, total.errors_bob / total.bits,
                                   total.errors_eve / total.bits, total.bits, total.errors_bob,
                                   total.errors_eve, total.flagged_chips, n_trials))
    return points


TRACE_HEADER = ("scheme", "ebn0_db", "l", "q", "m", "bin", "c_hat", "abs_gamma", "arg_gamma", "flags")


def trace_sweep(spec: ExperimentSpec) -> list[tuple]:
    """Bob's detection trace for the first trial of every point (same draws as the sweep)."""
    config = validate(spec.config)
    rows: list[tuple] = []
    for p, ebn0 in enumerate(spec.ebn0_grid_db):
        point_rows: list = []
        run_trial(config, spec.scheme, ebn0, spec.eve_strategy,
                  trial_seed(spec.seed, spec.scheme, p, 0), point_rows)
        rows += [(spec.scheme.value, ebn0, *r) for r in point_rows]
    return rows


def binary_entropy(p) -> np.ndarray:
    p = np.clip(np.asarray(p, dtype=float), 1e-12, 0.5)
    return -(p * np.log2(p) + (1 - p) * np.log2(1 - p))


def estimate_secrecy(points: Iterable[BerPoint]) -> list[tuple[float, float]]:
    """BSC proxy ``[(1 - H_b(ber_bob)) - (1 - H_b(ber_eve))]^+`` per point.

    A proxy for comparing links, not the secrecy capacity of the coded channel.
    """
    out = []
    for pt in points:
        if pt.aborted:
            out.append((pt.ebn0_db, math.nan))
            continue
        cs = (1 - binary_entropy(pt.ber_bob)) - (1 - binary_entropy(pt.ber_eve))
        out.append((pt.ebn0_db, float(max(cs, 0.0))))
    return out


class RateRow(NamedTuple):
    num_tx: int
    scheme: str
    bits_per_chip: int
    rate_bps: float


def run_rate_sweep(template: SystemConfig, num_hops: int, tx_range: Iterable[int],
                   schemes: Sequence[Scheme | str] = SCHEME_ORDER) -> list[RateRow]:
    """Achievable rate per (M, scheme).

    Only the rate formula is exercised, so the template is not required to be
    a synthesizable waveform at every M.
    """
    rows = []
    for M in tx_range:
        if not 1 <= M <= num_hops:
            raise errors.TooManyTxAntennas(f"M = {M} outside [1, {num_hops}]")
        cfg = template.replace(num_hops=num_hops, num_tx=M, num_rx=max(M, template.num_rx))
        for s in schemes:
            s = Scheme(s)
            rows.append(RateRow(M, s.value, bits_per_chip(cfg, s).total, achievable_rate(cfg, s)))
    return rows


# --- AF jobs -------------------------------------------------------------------

@dataclass(frozen=True)
class AFJobSpec:
    config: SystemConfig = field(default_factory=small_af_config)
    schemes: tuple[str, ...] = ("HYB",)
    delays_s: tuple[float, ...] | None = None
    dopplers_hz: tuple[float, ...] | None = None
    spatial_freqs: tuple[float, float] = (0.0, 0.0)
    gamma_spacing: float = 1.0
    draws: int = 16
    seed: int = 0
    full_grid: bool = False

    def axes(self, config: ValidatedConfig) -> tuple[np.ndarray, np.ndarray]:
        if self.delays_s is not None:
            delays = np.asarray(self.delays_s, dtype=float)
        else:
            span = 2 * config.samples_per_chip
            delays = np.arange(-span, span + 1) / config.sample_rate_hz
        if self.dopplers_hz is not None:
            dopplers = np.asarray(self.dopplers_hz, dtype=float)
        else:
            frame_s = config.num_pulses * config.pri_s
            dopplers = np.linspace(-4 / frame_s, 4 / frame_s, 33)
        return delays, dopplers


def _check_af_size(n_points: int, config: ValidatedConfig) -> None:
    if n_points * config.num_pulses > MAX_AF_WORK:
        raise errors.GridTooLarge(
            f"{n_points} grid points x {config.num_pulses} pulses exceeds {MAX_AF_WORK}")


def run_af_job(job: AFJobSpec, out_dir: str | Path | None = None) -> dict[str, AFGrid]:
    """Zero-Doppler and zero-delay cuts from both sources plus the R-draw expectation."""
    config = validate(job.config)
    delays, dopplers = job.axes(config)
    n_points = delays.size * dopplers.size if job.full_grid else delays.size + dopplers.size
    _check_af_size(n_points * max(1, job.draws), config)
    f, fp = job.spatial_freqs
    out: dict[str, AFGrid] = {}
    for s in job.schemes:
        scheme = Scheme(s)
        ss = np.random.SeedSequence(job.seed, spawn_key=(SCHEME_ORDER.index(scheme),))
        s_bits, s_key, s_draws = ss.spawn(3)
        n_bits = bits_per_pulse(config, scheme) * config.num_pulses
        plans = encode_payload(np.random.default_rng(s_bits).integers(0, 2, n_bits, dtype=np.uint8),
                               config, scheme)
        schedule = generate_schedule(SecretKey(np.random.default_rng(s_key).bytes(32)), config)
        frame = synthesize(plans, schedule, config)
        tag = scheme.value.lower()
        for source in ("numerical", "closed_form"):
            kw = dict(config=config, f=f, fp=fp, gamma_spacing=job.gamma_spacing, frame=frame)
            out[f"af_{tag}_{source}_zero_doppler"] = af_grid(source, plans, schedule, delays, [0.0], **kw)
            out[f"af_{tag}_{source}_zero_delay"] = af_grid(source, plans, schedule, [0.0], dopplers, **kw)
            if job.full_grid:
                out[f"af_{tag}_{source}_grid"] = af_grid(source, plans, schedule, delays, dopplers, **kw)
        seed_r = int(s_draws.generate_state(1, np.uint64)[0])
        out[f"af_{tag}_expectation_zero_doppler"] = af_expectation(
            job.draws, plans, config, delays, [0.0], seed_r, "numerical", f, fp, job.gamma_spacing)
        out[f"af_{tag}_expectation_zero_delay"] = af_expectation(
            job.draws, plans, config, [0.0], dopplers, seed_r, "numerical", f, fp, job.gamma_spacing)
    if out_dir is not None:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        for name, grid in out.items():
            grid.to_csv(out_dir / f"{name}.csv")
    return out


# --- output -------------------------------------------------------------------

def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def write_csv(path: str | Path, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


BER_HEADER = ("scheme", "ebn0_db", "ber_bob", "ber_eve", "bits_counted", "errors_bob", "errors_eve",
              "flagged_chips", "trials", "aborted", "note")


def write_ber_csv(path: str | Path, points: Iterable[BerPoint]) -> None:
    write_csv(path, BER_HEADER, (tuple(asdict(p).values()) for p in points))


def write_secrecy_csv(path: str | Path, scheme_rows: Iterable[tuple[str, float, float]]) -> None:
    write_csv(path, ("scheme", "ebn0_db", "secrecy_bits_per_bit"), scheme_rows)


def write_rate_csv(path: str | Path, rows: Iterable[RateRow]) -> None:
    write_csv(path, RateRow._fields, rows)


def write_meta(path: str | Path, command: str, resolved: dict) -> None:
    """Resolved inputs and package version; no timestamps so reruns are byte-identical."""
    meta = {"command": command, "csv_schema_version": CSV_SCHEMA_VERSION,
            "package_version": __version__, **resolved}
    Path(path).write_text(json.dumps(meta, indent=2, sort_keys=True, default=str) + "\n")
