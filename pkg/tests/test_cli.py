import json

import numpy as np
import pytest

from ddpulse.cli import ConfigError, main, parse_range

SMALL = ["--M", "16", "--N", "8", "--Q", "4"]


def run(tmp_path, *args):
    return main([*args, "--output-dir", str(tmp_path)])


def test_parse_range():
    assert parse_range("0:2:6") == [0.0, 2.0, 4.0, 6.0]
    assert parse_range("1.5") == [1.5]
    assert parse_range([1, 2]) == [1.0, 2.0]
    with pytest.raises(ConfigError):
        parse_range("0:0:4")


def test_psd_outputs_and_manifest(tmp_path):
    assert run(tmp_path, "--experiment", "psd", "--scheme", "oddm", "--frames", "8",
               "--segment-len", "512", *SMALL) == 0
    rows = (tmp_path / "psd.csv").read_text().splitlines()
    assert rows[0] == "freq_hz,psd_db" and len(rows) == 513
    man = json.loads((tmp_path / "manifest.json").read_text())
    assert man["config"]["scheme"] == "oddm" and man["seed"] == 1
    assert man["version"] and man["wall_time_s"] >= 0


def test_oddm_default_psd_shows_staircase(tmp_path):
    assert run(tmp_path, "--experiment", "psd", "--scheme", "oddm", "--frames", "100") == 0
    man = json.loads((tmp_path / "manifest.json").read_text())
    assert man["results"]["distinct_plateaus"] >= 2


def test_ber_csv_schema_and_determinism(tmp_path):
    args = ["--experiment", "ber", "--channel", "eva", "--ebn0", "0:5:10", "--frames", "3", *SMALL]
    assert run(tmp_path / "a", *args) == 0
    assert run(tmp_path / "b", *args) == 0
    a = (tmp_path / "a" / "ber.csv").read_bytes()
    assert a == (tmp_path / "b" / "ber.csv").read_bytes()
    lines = a.decode().splitlines()
    assert lines[0] == "ebn0_db,ber,bit_errors,bits_total,frames,seed"
    assert [float(l.split(",")[0]) for l in lines[1:]] == [0.0, 5.0, 10.0]


def test_config_file_with_flag_override(tmp_path):
    cfg = tmp_path / "run.yaml"
    cfg.write_text("experiment: psd\nM: 16\nN: 8\nscheme: lps-otfs\nQ: 4\nframes: 4\nsegment_len: 256\nzg: 1\n")
    assert main(["--config", str(cfg), "--zg", "2", "--output-dir", str(tmp_path / "o")]) == 0
    man = json.loads((tmp_path / "o" / "manifest.json").read_text())
    assert man["config"]["zg"] == 2 and man["config"]["scheme"] == "lps-otfs"


def test_manifest_config_round_trips(tmp_path):
    assert run(tmp_path / "a", "--experiment", "psd", "--frames", "4", "--segment-len", "256", *SMALL) == 0
    man = json.loads((tmp_path / "a" / "manifest.json").read_text())
    conf = dict(man["config"], output_dir=str(tmp_path / "b"))
    (tmp_path / "again.json").write_text(json.dumps(conf))
    assert main(["--config", str(tmp_path / "again.json")]) == 0
    assert (tmp_path / "a" / "psd.csv").read_bytes() == (tmp_path / "b" / "psd.csv").read_bytes()


def test_missing_field_names_it(tmp_path, capsys):
    cfg = tmp_path / "bad.yaml"
    cfg.write_text("experiment: psd\nN: 8\nscheme: oddm\n")
    assert main(["--config", str(cfg), "--output-dir", str(tmp_path / "o")]) == 1
    assert "M" in capsys.readouterr().err
    assert not (tmp_path / "o").exists()


@pytest.mark.parametrize("text", ["experiment: psd\nM: 8\nN: 4\nscheme: oddm\nbogus: 1\n", "- 1\n- 2\n",
                                  "experiment: psd\nM: eight\nN: 4\nscheme: oddm\n"])
def test_bad_config_files(tmp_path, text):
    cfg = tmp_path / "bad.yaml"
    cfg.write_text(text)
    assert main(["--config", str(cfg), "--output-dir", str(tmp_path / "o")]) == 1


def test_unknown_flag_and_invalid_values(tmp_path):
    with pytest.raises(SystemExit) as exc:
        main(["--bogus", "1"])
    assert exc.value.code == 1
    assert run(tmp_path, "--experiment", "psd", "--M", "8", "--Q", "8", "--scheme", "oddm") == 1
    assert run(tmp_path, "--frames", "0") == 1


def test_runtime_error_exit_code(tmp_path, capsys):
    # EVA longer than a zero-length CP is rejected when the channel matrix is built
    assert run(tmp_path, "--experiment", "ber", "--M", "8", "--N", "4", "--cp", "0",
               "--frames", "1", "--ebn0", "5") == 2
    assert "runtime error" in capsys.readouterr().err
    assert not (tmp_path / "ber.csv").exists()


def test_oracle_check(tmp_path, capsys):
    assert run(tmp_path, "--experiment", "oracle-check", "--frames", "3") == 0
    out = capsys.readouterr().out
    assert "PASS" in out and "FAIL" not in out
    assert (tmp_path / "oracle_check.csv").exists()


def test_vectors(tmp_path):
    assert run(tmp_path, "--experiment", "vectors", "--frames", "2", *SMALL) == 0
    assert sorted(p.name for p in (tmp_path / "vectors").iterdir()) == [
        "frame_000.csv", "frame_001.csv", "signal_000.csv", "signal_001.csv"]
    man = json.loads((tmp_path / "manifest.json").read_text())
    assert man["results"]["vector_pairs"] == 2
    assert np.isfinite(man["wall_time_s"])
