from __future__ import annotations

import sys
from pathlib import Path

import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

sys.path.insert(0, str(Path(__file__).parent))

from rfpa.params import SystemConfig, validate  # noqa: E402

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def tiny_config(K: int, M: int, phi_f: int = 2, phi_t: int = 4, Q: int | None = None,
                oversample: int = 1, **extra):
    """A valid desk-scale config with 1 us chips, ``n_c = oversample * phi_f * K``."""
    Q = Q if Q is not None else max(1, -(-K // M))
    n_c = oversample * phi_f * K
    dt = 1e-6
    base = dict(
        bandwidth_hz=phi_f * K * 1e6, num_hops=K, pulse_duration_s=Q * dt, chips_per_pulse=Q,
        num_tx=M, num_rx=M, num_pulses=2, pri_s=(phi_t + 1) * Q * dt,
        sample_rate_hz=n_c * 1e6,
    )
    base.update(extra)
    return validate(SystemConfig(**base))


@st.composite
def valid_configs(draw, max_hops: int = 12, max_pulses: int = 3):
    K = draw(st.integers(1, max_hops))
    M = draw(st.integers(1, K))
    Q = draw(st.integers(-(-K // M), -(-K // M) + 3))
    phi_f = draw(st.sampled_from([1, 2, 4]))
    phi_t = draw(st.sampled_from([1, 2, 4, 8]))
    over = draw(st.sampled_from([1, 2]))
    L = draw(st.integers(1, max_pulses))
    ask = draw(st.sampled_from([1, 2, 4]))
    psk = draw(st.sampled_from([1, 2, 4, 8]))
    return tiny_config(K, M, phi_f, phi_t, Q, over, num_pulses=L, ask_order=ask, psk_order=psk)


def random_bits(rng: np.random.Generator, n: int) -> np.ndarray:
    return rng.integers(0, 2, n, dtype=np.uint8)


def sim_chip_trials(cfg, n_trials: int, noise_power: float, seed: int):
    """Unit-gain SIM chips (M, n_c) on random distinct hops plus CN(0, sigma^2) noise.

    Yields ``(true_hops, chip)``; the chip is what the equaliser would hand to
    the detector.
    """
    from rfpa.waveform import chip_tones
    rng = np.random.default_rng(seed)
    K, M, n_c = cfg.num_hops, cfg.num_tx, cfg.samples_per_chip
    for _ in range(n_trials):
        hops = rng.permutation(K)[:M]
        chip = chip_tones(hops, n_c)
        if noise_power > 0:
            chip = chip + np.sqrt(noise_power / 2) * (rng.standard_normal(chip.shape)
                                                     + 1j * rng.standard_normal(chip.shape))
        yield hops, chip


# --- acceptance reporting -------------------------------------------------------

_ACCEPTANCE: dict[int, str] = {}


@pytest.fixture
def report():
    def _record(criterion: int, passed: bool, detail: str) -> None:
        _ACCEPTANCE[criterion] = f"criterion {criterion}: {'PASS' if passed else 'FAIL'}  {detail}"
    return _record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(_ACCEPTANCE):
        terminalreporter.write_line(_ACCEPTANCE[k])
