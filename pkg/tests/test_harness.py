import json
import math

import numpy as np
import pytest

from conftest import tiny_config
from rfpa import errors
from rfpa.codec import Scheme
from rfpa.harness import (AFJobSpec, BerPoint, ExperimentSpec, TrialCounts, binary_entropy,
                          estimate_secrecy, run_af_job, run_ber_sweep, run_rate_sweep, run_trial,
                          trace_sweep, trial_seed, write_ber_csv, write_meta)
from rfpa.params import SystemConfig, default_config, small_af_config


def point(bob, eve, aborted=False):
    return BerPoint("SIM", 10.0, bob, eve, 1000, 0, 0, 0, 1, aborted)


@pytest.mark.parametrize("bob, eve, want", [(0.0, 0.5, 1.0), (0.2, 0.2, 0.0), (0.3, 0.1, 0.0)])
def test_secrecy_proxy_examples(bob, eve, want):
    assert estimate_secrecy([point(bob, eve)])[0][1] == pytest.approx(want, abs=1e-9)


def test_secrecy_proxy_half_bit():
    # H_b(0.11) is 0.4999 to four places
    assert estimate_secrecy([point(0.11, 0.5)])[0][1] == pytest.approx(0.5, abs=1e-3)


def test_secrecy_of_aborted_point_is_nan():
    assert math.isnan(estimate_secrecy([point(0, 0, aborted=True)])[0][1])


def test_binary_entropy_clips():
    assert binary_entropy([0.0, 0.5, 0.7]).tolist() == pytest.approx([0.0, 1.0, 1.0], abs=1e-9)


def test_spec_validation_and_trial_rule():
    cfg = tiny_config(4, 2)
    with pytest.raises(ValueError):
        ExperimentSpec(cfg, "SIM", trials=0)
    with pytest.raises(ValueError):
        ExperimentSpec(cfg, "SIM", bits_min=10)
    spec = ExperimentSpec(cfg, "HYB", bits_min=1000)
    per_trial = 2 * 2 * (2 + 1 + 2 * 3)    # L * Q * (sel + perm + M*(ASK+PSK))
    assert spec.trials_per_point() == math.ceil(1000 / per_trial)
    assert ExperimentSpec(cfg, "HYB", trials=500).trials_per_point() == 500


@pytest.mark.parametrize("scheme", list(Scheme))
def test_noiseless_trial_has_no_bob_errors(scheme):
    cfg = default_config(num_pulses=3)
    counts = run_trial(cfg, scheme, math.inf, "genie", trial_seed(0, scheme, 0, 0))
    assert counts.errors_bob == 0 and counts.errors_eve == 0 and counts.flagged_chips == 0
    assert counts.bits > 0


def test_trial_counts_add():
    assert TrialCounts(1, 2, 3, 4) + TrialCounts(10, 20, 30, 40) == TrialCounts(11, 22, 33, 44)


def test_sweep_accounting():
    cfg = tiny_config(4, 2, num_pulses=4)
    spec = ExperimentSpec(cfg, "SIM", (0.0, 30.0), bits_min=1000)
    pts = run_ber_sweep(spec)
    assert [p.ebn0_db for p in pts] == [0.0, 30.0]
    for p in pts:
        assert p.bits_counted >= 1000 and p.trials == spec.trials_per_point()
        assert p.ber_bob == p.errors_bob / p.bits_counted
    assert pts[0].ber_bob > pts[1].ber_bob


def test_sweep_is_thread_count_independent():
    cfg = tiny_config(4, 2, num_pulses=2)
    a = run_ber_sweep(ExperimentSpec(cfg, "HYB", (5.0, 15.0), bits_min=2000, seed=9, threads=1))
    b = run_ber_sweep(ExperimentSpec(cfg, "HYB", (5.0, 15.0), bits_min=2000, seed=9, threads=4))
    assert a == b
    c = run_ber_sweep(ExperimentSpec(cfg, "HYB", (5.0, 15.0), bits_min=2000, seed=10))
    assert a != c


def test_failing_point_is_marked_aborted():
    cfg = default_config(num_pulses=1, ask_order=1)
    pts = run_ber_sweep(ExperimentSpec(cfg, "AMP", (0.0,), bits_min=1000))
    assert pts[0].aborted and "ZeroRateScheme" in pts[0].note and math.isnan(pts[0].ber_bob)


def test_trace_rows_cover_every_chip():
    cfg = tiny_config(4, 2, num_pulses=2)
    rows = trace_sweep(ExperimentSpec(cfg, "SIM", (10.0,), bits_min=1000))
    assert len(rows) == cfg.num_pulses * cfg.chips_per_pulse * cfg.num_tx
    assert rows[0][:2] == ("SIM", 10.0)


def test_rate_sweep_rows():
    rows = run_rate_sweep(SystemConfig(), 16, range(1, 17))
    assert len(rows) == 16 * 4
    hyb8 = next(r for r in rows if r.num_tx == 8 and r.scheme == "HYB")
    assert hyb8.bits_per_chip == 13 + 15 + 24
    with pytest.raises(errors.TooManyTxAntennas):
        run_rate_sweep(SystemConfig(), 16, [17])


def test_ber_csv_and_meta(tmp_path):
    write_ber_csv(tmp_path / "ber.csv", [point(0.25, 0.5)])
    lines = (tmp_path / "ber.csv").read_text().splitlines()
    assert lines[0].startswith("scheme,ebn0_db,ber_bob,ber_eve")
    assert lines[1].startswith("SIM,10.0,0.25,0.5,1000")
    write_meta(tmp_path / "meta.json", "ber", {"seed": 3})
    meta = json.loads((tmp_path / "meta.json").read_text())
    assert meta["seed"] == 3 and meta["csv_schema_version"] == 1 and "package_version" in meta


def test_af_job_outputs(tmp_path):
    job = AFJobSpec(small_af_config(), ("SIM", "HYB"), draws=4)
    grids = run_af_job(job, tmp_path)
    assert len(grids) == 2 * 6
    for name, g in grids.items():
        assert (tmp_path / f"{name}.csv").exists()
        if "zero_doppler" in name:
            assert g.delays_s[np.argmax(g.magnitudes[:, 0])] == 0.0
    num = grids["af_hyb_numerical_zero_doppler"].magnitudes
    closed = grids["af_hyb_closed_form_zero_doppler"].magnitudes
    assert np.max(np.abs(num - closed)) < 1e-9 * num.max()


def test_af_job_refuses_huge_grids():
    job = AFJobSpec(default_config(), delays_s=tuple(np.arange(2000) * 5e-9),
                    dopplers_hz=tuple(np.linspace(0, 1, 2000)), full_grid=True)
    with pytest.raises(errors.GridTooLarge):
        run_af_job(job)
