"""MIMO ambiguity function of the RFPA waveform.

Two independent routes:

* numerical -- Riemann sums of the cross-ambiguity integral over sampled
  frames (:func:`cross_af_numerical`, :func:`mimo_af`, :func:`numerical_af`);
* closed form -- the six-fold sum over antenna pairs, pulse pairs and chip
  pairs (:func:`closed_form_af`).

For one chip pair ``(m, l, q)`` / ``(m', l', q')`` with ``t_l = l*T_p + T_l``,
``F = f_l + c*df`` and ``u`` the time inside chip ``q``, the contribution is::

    exp(b2) * integral_{a1}^{b1} exp(i*w*u) du
    a1 = max((q'-q)*dt + t_l' - t_l - tau, 0)
    b1 = min((q'-q+1)*dt + t_l' - t_l - tau, dt)
    w  = 2*pi*(F - F' + nu)
    b2 = i*2*pi*(F*q*dt + nu*(q*dt + t_l) - F'*(q*dt + t_l - t_l' + tau))

(the minus sign before the F' term is what integrating the cross-ambiguity
definition over one chip pair gives).  The ``continuous`` kernel is the exact
integral; the ``sampled`` kernel replaces it by the left Riemann sum on the
``1/f_s`` grid, which is what the numerical route computes, so the two
routes can be compared to rounding precision.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from . import errors
from .codec import PulsePlan
from .keyschedule import AgilitySchedule, SecretKey, generate_schedule
from .params import ValidatedConfig
from .waveform import BasebandFrame, synthesize

LIMIT_EPS = 1e-9


@dataclass(frozen=True, eq=False)
class AFGrid:
    """|chi| on a (delay, Doppler) grid; rows are delays, columns Dopplers."""

    delays_s: np.ndarray
    dopplers_hz: np.ndarray
    spatial_freqs: tuple[float, float]
    magnitudes: np.ndarray
    normalization: str = "none"
    values: np.ndarray | None = None
    delay_residuals_s: np.ndarray | None = None
    meta: dict = field(default_factory=dict)

    def peak_normalized(self) -> "AFGrid":
        peak = float(self.magnitudes.max())
        scale = 1.0 / peak if peak > 0 else 1.0
        vals = None if self.values is None else self.values * scale
        return AFGrid(self.delays_s, self.dopplers_hz, self.spatial_freqs, self.magnitudes * scale,
                      "peak", vals, self.delay_residuals_s, dict(self.meta))

    def zero_doppler_cut(self) -> tuple[np.ndarray, np.ndarray]:
        j = int(np.argmin(np.abs(self.dopplers_hz)))
        return self.delays_s, self.magnitudes[:, j]

    def zero_delay_cut(self) -> tuple[np.ndarray, np.ndarray]:
        i = int(np.argmin(np.abs(self.delays_s)))
        return self.dopplers_hz, self.magnitudes[i, :]

    def origin_value(self) -> float:
        i = int(np.argmin(np.abs(self.delays_s)))
        j = int(np.argmin(np.abs(self.dopplers_hz)))
        return float(self.magnitudes[i, j])

    def to_csv(self, path: str | Path) -> None:
        """Long format ``tau_s,doppler_hz,magnitude`` plus a ``.json`` sidecar."""
        path = Path(path)
        with open(path, "w") as fh:
            fh.write("tau_s,doppler_hz,magnitude\n")
            for i, tau in enumerate(self.delays_s):
                for j, nu in enumerate(self.dopplers_hz):
                    fh.write(f"{float(tau)!r},{float(nu)!r},{float(self.magnitudes[i, j])!r}\n")
        sidecar = {
            "rows": len(self.delays_s), "cols": len(self.dopplers_hz),
            "spatial_freqs": list(self.spatial_freqs), "normalization": self.normalization,
            **self.meta,
        }
        path.with_suffix(".json").write_text(json.dumps(sidecar, indent=2, sort_keys=True) + "\n")


# --- numerical route ---------------------------------------------------------

def snap_delay(tau: float, sample_rate_hz: float) -> tuple[int, float]:
    """Nearest whole-sample delay and the residual ``tau - k/f_s``."""
    k = int(round(tau * sample_rate_hz))
    return k, tau - k / sample_rate_hz


def cross_af_numerical(x_m: np.ndarray, x_mp: np.ndarray, tau: float, nu: float,
                       config: ValidatedConfig) -> complex:
    """``sum_n x_m[n] conj(x_m'[n+k]) exp(i*2*pi*nu*n/f_s) / f_s`` with ``k = round(tau*f_s)``."""
    fs = config.sample_rate_hz
    n = len(x_m)
    k, _ = snap_delay(tau, fs)
    if abs(k) >= n:
        raise errors.DelayOutOfRange(f"delay of {k} samples outside a {n}-sample frame")
    if k >= 0:
        idx = np.arange(0, n - k)
    else:
        idx = np.arange(-k, n)
    prod = x_m[idx] * np.conj(x_mp[idx + k])
    return complex(np.sum(prod * np.exp(2j * np.pi * nu * idx / fs)) / fs)


def _steering(M: int, f: float, gamma_spacing: float) -> np.ndarray:
    return np.exp(2j * np.pi * f * np.arange(M) * gamma_spacing)


def mimo_af(frame: BasebandFrame, tau: float, nu: float, f: float, fp: float,
            config: ValidatedConfig, gamma_spacing: float = 1.0) -> complex:
    """Double sum of cross-AFs weighted by ``exp(i*2*pi*(f*m - f'*m')*gamma)``."""
    x = frame.samples
    M = x.shape[0]
    total = 0j
    for m in range(M):
        for mp in range(M):
            w = np.exp(2j * np.pi * (f * m - fp * mp) * gamma_spacing)
            total += w * cross_af_numerical(x[m], x[mp], tau, nu, config)
    return total


def numerical_af(frame: BasebandFrame, delays_s, dopplers_hz, config: ValidatedConfig,
                 f: float = 0.0, fp: float = 0.0, gamma_spacing: float = 1.0) -> np.ndarray:
    """Complex MIMO AF over a grid, shape (len(delays), len(dopplers)).

    Uses the beamformed sums ``y_f = sum_m x_m exp(i*2*pi*f*m*gamma)``; by
    linearity this equals :func:`mimo_af` at every point.  Only samples where
    ``y_f`` is non-zero are visited.
    """
    fs = config.sample_rate_hz
    x = frame.samples
    M, n_total = x.shape
    y = _steering(M, f, gamma_spacing) @ x
    yp = _steering(M, fp, gamma_spacing) @ x
    active = np.flatnonzero(y != 0)
    delays_s = np.atleast_1d(np.asarray(delays_s, dtype=float))
    dopplers_hz = np.atleast_1d(np.asarray(dopplers_hz, dtype=float))
    out = np.zeros((delays_s.size, dopplers_hz.size), dtype=complex)
    # chunk over samples to bound the size of the Doppler kernel
    chunk = max(1, 4_000_000 // max(1, dopplers_hz.size))
    for start in range(0, active.size, chunk):
        n = active[start:start + chunk]
        kernel = np.exp(2j * np.pi * np.outer(n, dopplers_hz) / fs) / fs
        for i, tau in enumerate(delays_s):
            k, _ = snap_delay(tau, fs)
            if abs(k) >= n_total:
                raise errors.DelayOutOfRange(f"delay of {k} samples outside a {n_total}-sample frame")
            shifted = n + k
            ok = (shifted >= 0) & (shifted < n_total)
            p = np.zeros(n.size, dtype=complex)
            p[ok] = y[n[ok]] * np.conj(yp[shifted[ok]])
            out[i] += p @ kernel
    return out


# --- closed-form route -------------------------------------------------------

def _overlap_kernel(w: np.ndarray, a1: np.ndarray, b1: np.ndarray, step: float | None,
                    chip_s: float) -> np.ndarray:
    """``integral_{a1}^{b1} exp(i*w*u) du`` (step None) or its left Riemann sum."""
    width = b1 - a1
    if step is None:
        small = np.abs(w) * chip_s < LIMIT_EPS
        safe_w = np.where(small, 1.0, w)
        mid = 0.5 * (a1 + b1)
        ratio = np.exp(1j * w * mid) * 2.0 * np.sin(0.5 * w * width) / safe_w
        return np.where(small, width * np.exp(1j * w * a1), ratio)
    n = np.rint(width / step)
    half = 0.5 * w * step
    s = np.sin(half)
    degenerate = np.abs(s) < 1e-12
    safe_s = np.where(degenerate, 1.0, s)
    dirichlet = np.exp(1j * w * (a1 + 0.5 * (n - 1) * step)) * step * np.sin(n * half) / safe_s
    return np.where(degenerate, n * step * np.exp(1j * w * a1), dirichlet)


class _PlanArrays:
    """Stacked gains, absolute tone frequencies and pulse start times."""

    def __init__(self, plans: Sequence[PulsePlan], schedule: AgilitySchedule, config: ValidatedConfig):
        if len(plans) != len(schedule):
            raise errors.PlanLengthMismatch(f"{len(plans)} plans but {len(schedule)} schedule entries")
        self.gains = np.stack([p.gains for p in plans])                          # (L, Q, M)
        hops = np.stack([p.hop_codes for p in plans])
        self.freqs = schedule.f_offsets_hz[:, None, None] + hops * config.hop_spacing_hz
        L = len(plans)
        self.starts = np.arange(L) * config.pri_s + schedule.t_offsets_s        # t_l


def closed_form_af(plans: Sequence[PulsePlan], schedule: AgilitySchedule, delays_s, dopplers_hz,
                   config: ValidatedConfig, f: float = 0.0, fp: float = 0.0,
                   gamma_spacing: float = 1.0, kernel: str = "continuous") -> np.ndarray:
    """Six-fold closed-form AF on a grid, shape (len(delays), len(dopplers)).

    ``kernel="sampled"`` evaluates each chip-pair overlap as the Riemann sum
    on the sample grid (delays snapped to whole samples) to mirror
    :func:`numerical_af`; ``"continuous"`` is the exact integral.
    """
    if kernel not in ("continuous", "sampled"):
        raise ValueError(f"unknown kernel {kernel!r}")
    arr = _PlanArrays(plans, schedule, config)
    L, Q, M = arr.gains.shape
    dt = config.chip_duration_s
    fs = config.sample_rate_hz
    step = 1.0 / fs if kernel == "sampled" else None
    pulse_len = Q * dt
    delays_s = np.atleast_1d(np.asarray(delays_s, dtype=float))
    dopplers_hz = np.atleast_1d(np.asarray(dopplers_hz, dtype=float))

    w_tx = _steering(M, f, gamma_spacing)
    w_rx = np.conj(_steering(M, fp, gamma_spacing))
    coef_a = w_tx * arr.gains                      # (L, Q, M)
    coef_b = w_rx * np.conj(arr.gains)             # (L, Q, M')
    qdt = np.arange(Q) * dt
    nu = dopplers_hz[None, None, None, :]
    out = np.zeros((delays_s.size, dopplers_hz.size), dtype=complex)

    for i, tau in enumerate(delays_s):
        if step is not None:
            tau = round(tau * fs) / fs
        gap = arr.starts[None, :] - arr.starts[:, None] - tau               # t_l' - t_l - tau
        for l, lp in zip(*np.nonzero(np.abs(gap) < pulse_len * (1 + 1e-12))):
            D = qdt[None, :] - qdt[:, None] + gap[l, lp]                    # (q, q')
            a1 = np.maximum(D, 0.0)
            b1 = np.minimum(D + dt, dt)
            if step is not None:
                hit = (b1 - a1) > 0.5 * step
            else:
                hit = (b1 - a1) > 0
            qs, qps = np.nonzero(hit)
            if qs.size == 0:
                continue
            F = arr.freqs[l][qs][:, :, None, None]                        # (P, M, 1, 1)
            Fp = arr.freqs[lp][qps][:, None, :, None]                     # (P, 1, M', 1)
            q_t = qdt[qs][:, None, None, None]
            t_l, t_lp = arr.starts[l], arr.starts[lp]
            w = 2 * np.pi * (F - Fp + nu)
            b2 = 2 * np.pi * (F * q_t + nu * (q_t + t_l) - Fp * (q_t + t_l - t_lp + tau))
            k = _overlap_kernel(w, a1[qs, qps][:, None, None, None],
                                b1[qs, qps][:, None, None, None], step, dt)
            coef = (coef_a[l][qs][:, :, None] * coef_b[lp][qps][:, None, :])[..., None]
            out[i] += np.sum(coef * np.exp(1j * b2) * k, axis=(0, 1, 2))
    return out


def chip_pair_term(plans: Sequence[PulsePlan], schedule: AgilitySchedule, config: ValidatedConfig,
                   m: int, l: int, q: int, mp: int, lp: int, qp: int, tau: float, nu: float,
                   kernel: str = "continuous") -> complex:
    """One (m, l, q) x (m', l', q') term of the closed form, without steering phases."""
    arr = _PlanArrays(plans, schedule, config)
    dt = config.chip_duration_s
    step = 1.0 / config.sample_rate_hz if kernel == "sampled" else None
    if step is not None:
        tau = round(tau / step) * step
    D = (qp - q) * dt + arr.starts[lp] - arr.starts[l] - tau
    a1, b1 = max(D, 0.0), min(D + dt, dt)
    if b1 - a1 <= (0.5 * step if step else 0.0):
        return 0j
    F, Fp = arr.freqs[l, q, m], arr.freqs[lp, qp, mp]
    t_l, t_lp = arr.starts[l], arr.starts[lp]
    w = 2 * np.pi * (F - Fp + nu)
    b2 = 2 * np.pi * (F * q * dt + nu * (q * dt + t_l) - Fp * (q * dt + t_l - t_lp + tau))
    k = _overlap_kernel(np.array(w), np.array(a1), np.array(b1), step, dt)
    return complex(arr.gains[l, q, m] * np.conj(arr.gains[lp, qp, mp]) * np.exp(1j * b2) * k)


# --- grids, cuts, expectation ---------------------------------------------------

def af_grid(source: str, plans: Sequence[PulsePlan], schedule: AgilitySchedule, delays_s, dopplers_hz,
            config: ValidatedConfig, f: float = 0.0, fp: float = 0.0, gamma_spacing: float = 1.0,
            kernel: str = "sampled", keep_complex: bool = False,
            frame: BasebandFrame | None = None) -> AFGrid:
    """|chi| over a grid from either route (``source`` = ``numerical`` or ``closed_form``)."""
    delays_s = np.atleast_1d(np.asarray(delays_s, dtype=float))
    dopplers_hz = np.atleast_1d(np.asarray(dopplers_hz, dtype=float))
    for name, axis in (("delays", delays_s), ("dopplers", dopplers_hz)):
        if axis.size > 1 and not np.all(np.diff(axis) > 0):
            raise ValueError(f"{name} axis must be strictly increasing")
    fs = config.sample_rate_hz
    if source == "numerical":
        if frame is None:
            frame = synthesize(plans, schedule, config)
        vals = numerical_af(frame, delays_s, dopplers_hz, config, f, fp, gamma_spacing)
        residuals = np.array([snap_delay(t, fs)[1] for t in delays_s])
    elif source == "closed_form":
        vals = closed_form_af(plans, schedule, delays_s, dopplers_hz, config, f, fp, gamma_spacing, kernel)
        residuals = (np.array([snap_delay(t, fs)[1] for t in delays_s])
                     if kernel == "sampled" else np.zeros(delays_s.size))
    else:
        raise ValueError(f"unknown AF source {source!r}")
    meta = {"source": source, "kernel": kernel if source == "closed_form" else "riemann",
            "gamma_spacing": gamma_spacing}
    return AFGrid(delays_s, dopplers_hz, (f, fp), np.abs(vals), "none",
                  vals if keep_complex else None, residuals, meta)


def ensemble_schedules(seed: int, count: int, config: ValidatedConfig) -> list[AgilitySchedule]:
    """``count`` independent keyed schedules, reproducible from ``seed``."""
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    return [generate_schedule(SecretKey(rng.bytes(32)), config) for _ in range(count)]


def af_expectation(draws: int, plans: Sequence[PulsePlan], config: ValidatedConfig, delays_s,
                   dopplers_hz, seed: int = 0, source: str = "numerical", f: float = 0.0,
                   fp: float = 0.0, gamma_spacing: float = 1.0) -> AFGrid:
    """Mean |chi| over ``draws`` freshly keyed agility schedules with fixed plans."""
    if draws < 1:
        raise ValueError("need at least one draw")
    total = None
    for sched in ensemble_schedules(seed, draws, config):
        g = af_grid(source, plans, sched, delays_s, dopplers_hz, config, f, fp, gamma_spacing)
        total = g.magnitudes if total is None else total + g.magnitudes
    meta = dict(g.meta, draws=draws, seed=seed, statistic="mean_abs")
    return AFGrid(g.delays_s, g.dopplers_hz, (f, fp), total / draws, "none", None,
                  g.delay_residuals_s, meta)


def first_null(axis: np.ndarray, cut: np.ndarray) -> float:
    """Position of the first local minimum of ``cut`` on the positive side of the axis."""
    pos = np.flatnonzero(axis > 0)
    i0 = int(np.argmin(np.abs(axis)))
    seq = np.concatenate([[i0], pos])
    vals = cut[seq]
    for j in range(1, len(seq) - 1):
        if vals[j] <= vals[j - 1] and vals[j] <= vals[j + 1]:
            return float(axis[seq[j]])
    return float(axis[seq[-1]])
