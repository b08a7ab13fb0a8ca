import csv
import json
import subprocess
import sys

import pytest

from rfpa.cli import main


def read_csv(path):
    with open(path) as fh:
        return list(csv.DictReader(fh))


def test_validate_defaults(capsys):
    assert main(["validate", "--describe"]) == 0
    info = json.loads(capsys.readouterr().out)
    assert info["samples_per_chip"] == 40


def test_invalid_config_exit_code(capsys):
    assert main(["validate", "--num-tx", "20"]) == 2
    assert "invalid configuration" in capsys.readouterr().err


def test_config_file(tmp_path):
    (tmp_path / "c.json").write_text(json.dumps({"num_tx": 4, "num_rx": 4}))
    assert main(["validate", "--config", str(tmp_path / "c.json")]) == 0


def test_ber_outputs(tmp_path):
    args = ["ber", "--scheme", "SIM,HYB", "--ebn0", "0,inf", "--bits-min", "1000", "--num-pulses", "2",
            "--trace", "--out-dir", str(tmp_path)]
    assert main(args) == 0
    rows = read_csv(tmp_path / "ber.csv")
    assert [(r["scheme"], r["ebn0_db"]) for r in rows] == [("SIM", "0.0"), ("SIM", "inf"),
                                                          ("HYB", "0.0"), ("HYB", "inf")]
    assert all(float(r["ber_bob"]) == 0 for r in rows if r["ebn0_db"] == "inf")
    assert len(read_csv(tmp_path / "secrecy.csv")) == 4
    assert read_csv(tmp_path / "trace.csv")
    meta = json.loads((tmp_path / "meta.json").read_text())
    assert meta["command"] == "ber" and len(meta["experiments"]) == 2


def test_rate(tmp_path):
    assert main(["rate", "--m-max", "8", "--out-dir", str(tmp_path)]) == 0
    rows = read_csv(tmp_path / "rate.csv")
    assert len(rows) == 32
    assert main(["rate", "--m-max", "17", "--out-dir", str(tmp_path)]) == 2


def test_af(tmp_path):
    assert main(["af", "--scheme", "SIM", "--draws", "2", "--full-grid", "--out-dir", str(tmp_path)]) == 0
    meta = json.loads((tmp_path / "meta.json").read_text())
    assert "af_sim_numerical_grid.csv" in meta["outputs"]
    for name in meta["outputs"]:
        assert (tmp_path / name).exists()


def test_schedule_dump(tmp_path):
    assert main(["schedule-dump", "--key", "00ff", "--num-pulses", "5", "--out-dir", str(tmp_path)]) == 0
    assert len(read_csv(tmp_path / "schedule.csv")) == 5


def test_codec_dump_tables(tmp_path):
    assert main(["codec", "dump-tables", "--max-entries", "64", "--out-dir", str(tmp_path)]) == 0
    assert json.loads((tmp_path / "codec_tables.json").read_text())


def test_module_entry_point():
    out = subprocess.run([sys.executable, "-m", "rfpa", "validate"], capture_output=True, text=True)
    assert out.returncode == 0 and out.stdout.strip() == "ok"


def test_unknown_subcommand():
    with pytest.raises(SystemExit):
        main(["fly"])
