import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import random_bits, tiny_config, valid_configs
from oracles import naive_dft
from rfpa import errors
from rfpa.codec import ChipSymbols, PulsePlan, Scheme, bits_per_pulse, encode_payload
from rfpa.keyschedule import AgilitySchedule, SecretKey, generate_schedule, zero_schedule
from rfpa.params import default_config
from rfpa.waveform import (BasebandFrame, chip_reference_vector, chip_tones, synthesize,
                           synthesize_direct)


def one_chip_plan(hops, amps=None, phases=None, scheme=Scheme.SIM):
    hops = np.asarray(hops)
    amps = np.ones(hops.size) if amps is None else np.asarray(amps, float)
    phases = np.zeros(hops.size) if phases is None else np.asarray(phases, float)
    return PulsePlan((ChipSymbols(amps, phases, hops),), scheme)


def frame_for(cfg, scheme=Scheme.HYB, seed=0, key=b"k"):
    rng = np.random.default_rng(seed)
    plans = encode_payload(random_bits(rng, bits_per_pulse(cfg, scheme) * cfg.num_pulses), cfg, scheme)
    sched = generate_schedule(SecretKey(key), cfg)
    return plans, sched, synthesize(plans, sched, cfg)


def test_dc_chip_is_all_ones():
    cfg = tiny_config(1, 1, Q=1, num_pulses=1)
    frame = synthesize([one_chip_plan([0])], zero_schedule(cfg), cfg)
    n_c = cfg.samples_per_chip
    assert np.array_equal(frame.samples[0, :n_c], np.ones(n_c, complex))
    assert np.all(frame.samples[0, n_c:] == 0)


def test_hop_three_lands_on_bin_three():
    cfg = default_config()
    chip = chip_tones(3, cfg.samples_per_chip)
    spec = np.abs(naive_dft(chip))
    assert int(np.argmax(spec)) == 3
    assert spec[3] == pytest.approx(cfg.samples_per_chip)
    assert np.delete(spec, 3).max() < 1e-9


def test_distinct_hops_orthogonal_over_a_chip():
    n_c = default_config().samples_per_chip
    assert abs(np.vdot(chip_tones(0, n_c), chip_tones(1, n_c))) < 1e-12


def test_reference_rows():
    cfg = default_config()
    sched = AgilitySchedule.from_indices([0, 0], [0, 2], cfg)
    ref = chip_reference_vector(cfg, sched, 0)
    assert ref.shape == (cfg.num_hops, cfg.samples_per_chip)
    assert np.allclose(ref[0], 1)
    assert np.allclose(np.abs(chip_reference_vector(cfg, sched, 1)), 1)
    gram = ref @ ref.conj().T
    assert np.max(np.abs(gram - cfg.samples_per_chip * np.eye(cfg.num_hops))) < 1e-12 * cfg.samples_per_chip
    with pytest.raises(IndexError):
        chip_reference_vector(cfg, sched, 2)


def test_integer_bin_synthesis_matches_continuous_formula():
    cfg = default_config(num_pulses=3)
    plans, sched, frame = frame_for(cfg)
    direct = synthesize_direct(plans, sched, cfg)
    assert np.max(np.abs(frame.samples - direct.samples)) < 1e-9


def test_energy_confined_to_pulse_windows():
    cfg = default_config(num_pulses=4)
    plans, sched, frame = frame_for(cfg, Scheme.SIM)
    mask = np.zeros(frame.num_samples, bool)
    for l in range(cfg.num_pulses):
        s = sched.pulse_start_sample(l, cfg)
        expect = l * cfg.samples_per_pri + round((sched.t_offsets_s[l]) * cfg.sample_rate_hz)
        assert s == expect
        mask[s:s + cfg.samples_per_pulse] = True
    assert np.all(frame.samples[:, ~mask] == 0)
    assert np.all(np.abs(frame.samples[:, mask]) > 0)


def test_frame_energy_for_unit_amplitudes():
    cfg = default_config()
    _, _, frame = frame_for(cfg, Scheme.SIM)
    assert frame.energy() == pytest.approx(cfg.num_tx * cfg.num_pulses * cfg.samples_per_pulse)


@given(st.binary(min_size=1, max_size=8), st.binary(min_size=1, max_size=8))
def test_agility_does_not_change_energy(k1, k2):
    cfg = tiny_config(4, 2, num_pulses=3, ask_order=2)
    plans, _, f1 = frame_for(cfg, Scheme.HYB, key=k1)
    f2 = synthesize(plans, generate_schedule(SecretKey(k2), cfg), cfg)
    assert f1.energy() == pytest.approx(f2.energy(), rel=1e-12)


def random_plans(cfg, rng):
    plans = []
    for _ in range(cfg.num_pulses):
        chips = tuple(ChipSymbols(rng.uniform(0.5, 2, cfg.num_tx), rng.uniform(0, 2 * np.pi, cfg.num_tx),
                                  rng.permutation(cfg.num_hops)[:cfg.num_tx])
                      for _ in range(cfg.chips_per_pulse))
        plans.append(PulsePlan(chips, Scheme.HYB))
    return plans


@given(valid_configs(max_pulses=2), st.integers(0, 2 ** 32 - 1))
def test_every_chip_window_is_confined_to_the_band(cfg, seed):
    # the rectangular window leaks across a whole-frame DFT, but every chip-length
    # window holds integer-bin tones only, all below BW
    rng = np.random.default_rng(seed)
    sched = generate_schedule(SecretKey(seed.to_bytes(4, "big")), cfg)
    frame = synthesize(random_plans(cfg, rng), sched, cfg)
    n_c = cfg.samples_per_chip
    band_bins = int(round(cfg.bandwidth_hz / cfg.hop_spacing_hz))
    for l in range(cfg.num_pulses):
        s = sched.pulse_start_sample(l, cfg)
        chips = frame.samples[:, s:s + cfg.samples_per_pulse].reshape(cfg.num_tx, -1, n_c)
        spec = np.abs(np.fft.fft(chips, axis=-1)) ** 2
        assert spec[..., band_bins:].sum() <= 1e-9 * spec.sum()


def test_plan_length_mismatch():
    cfg = default_config(num_pulses=2)
    plans, sched, _ = frame_for(cfg)
    with pytest.raises(errors.PlanLengthMismatch):
        synthesize(plans[:1], sched, cfg)
    with pytest.raises(errors.PlanLengthMismatch):
        synthesize([one_chip_plan(np.arange(8))] * 2, sched, cfg)


def test_frame_file_roundtrip(tmp_path):
    cfg = tiny_config(4, 2)
    _, _, frame = frame_for(cfg)
    path = tmp_path / "f.cf32"
    frame.to_file(path)
    back = BasebandFrame.from_file(path)
    assert back.sample_rate_hz == frame.sample_rate_hz
    assert back.samples.shape == frame.samples.shape
    assert np.max(np.abs(back.samples - frame.samples)) < 1e-6
