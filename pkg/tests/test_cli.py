import argparse
import json

import pytest

from vessel_lab import realization
from vessel_lab.cli import main, parse_complex


@pytest.mark.parametrize("text,value", [
    ("1", 1), ("-2.5", -2.5), ("i", 1j), ("-i", -1j), ("3+4i", 3 + 4j),
    ("1-0.5j", 1 - 0.5j), ("0.2i", 0.2j), ("1e-1", 0.1), (" 5-2i ", 5 - 2j),
])
def test_parse_complex(text, value):
    assert parse_complex(text) == value


@pytest.mark.parametrize("text", ["", "abc", "1+", "i2", "nan", "inf+1i"])
def test_parse_complex_rejects(text):
    with pytest.raises(argparse.ArgumentTypeError):
        parse_complex(text)


@pytest.fixture
def exp_file(tmp_path):
    path = tmp_path / "exp.json"
    assert main(["soliton", "--which", "exp", "--mu", "0.5", "--out", str(path)]) == 0
    return path


def test_soliton_and_validate(exp_file, capsys):
    capsys.readouterr()
    assert main(["validate", str(exp_file)]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["lyapunov_residual"] <= 1e-12


def test_validate_bad_inputs(tmp_path, exp_file):
    assert main(["validate", str(tmp_path / "missing.json")]) == 2
    bad = tmp_path / "bad.json"
    bad.write_text(exp_file.read_text()[:40])
    assert main(["validate", str(bad)]) == 2


def test_validate_singular_is_numeric_failure(tmp_path):
    import numpy as np
    r = realization.Realization(np.eye(1), np.eye(1), np.zeros((1, 1)), np.ones((1, 3)), np.ones((3, 1)))
    path = tmp_path / "sing.json"
    realization.save(r, path)
    assert main(["validate", str(path)]) == 1


def test_random_roundtrip(tmp_path):
    path = tmp_path / "r.json"
    assert main(["random", "--n", "2", "--seed", "4", "--symmetric", "--out", str(path)]) == 0
    assert realization.load(path) == realization.random_symmetric(2, 4)


def test_sample_csv(exp_file, tmp_path):
    out = tmp_path / "q.csv"
    rc = main(["sample", str(exp_file), "--nx", "5", "--nt", "3", "--fields", "q,tau", "--out", str(out)])
    assert rc == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "x,t,re_q,im_q,re_tau,im_tau,masked"
    assert len(lines) == 16


def test_sample_unknown_field(exp_file):
    assert main(["sample", str(exp_file), "--fields", "q,nope"]) == 2


def test_residual_auto_and_wrong_beta(exp_file, capsys):
    args = ["residual", str(exp_file), "--x0", "-0.25", "--x1", "0.25", "--nx", "11",
            "--t0", "-0.1", "--t1", "0.1", "--nt", "5"]
    capsys.readouterr()
    assert main(args) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["calibration"]["beta"] == pytest.approx(1 / 3, abs=1e-8)
    assert main(args + ["--beta", "3"]) == 1
    assert main(args + ["--beta", "three"]) == 2


def test_scattering(exp_file, capsys):
    capsys.readouterr()
    assert main(["scattering", str(exp_file), "--lambda", "5+2i", "--x", "0.3"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["transfer_ode_residual"] <= 1e-6
    assert len(doc["S"]) == 3


def test_scattering_on_spectrum(tmp_path):
    path = tmp_path / "t.json"
    realization.save(realization.trivial(), path)
    assert main(["scattering", str(path), "--lambda", "1"]) == 1


def test_atlas(exp_file, tmp_path):
    out = tmp_path / "a.csv"
    assert main(["atlas", str(exp_file), "--nx", "6", "--nt", "4", "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "x,t,re_min_sv,im_min_sv,masked"
    assert all(line.endswith(",0") for line in lines[1:])


def test_paper_convention_time_rejected(exp_file):
    assert main(["--convention", "paper", "sample", str(exp_file), "--nx", "3", "--nt", "3"]) == 1
