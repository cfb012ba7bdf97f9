import csv
import json
import subprocess
import sys

import pytest

from qrlin.cli import main


def _spec(tmp_path, record, name="map.json"):
    path = tmp_path / name
    path.write_text(json.dumps(record))
    return str(path)


ZABSZ = {"kind": "radial_power", "C": 1, "n": 1, "m": 1, "R": 0.5}
SUPERREP = {"kind": "radial_power", "C": 1, "n": 2, "m": -1.5, "R": 1.0}
KOENIGS = {"kind": "holomorphic_series", "coeffs": [0.5, 0.1], "R": 0.5}
BOETTCHER = {"kind": "holomorphic_series", "coeffs": [0, 1, 0.1], "R": 0.5}
OFFSET = {"map": {"kind": "radial_power", "C": 1.1051709180756477, "n": 1, "m": 1, "R": 0.5},
          "representative": ZABSZ}


def test_analyze_classifies_examples(tmp_path, capsys):
    assert main(["analyze", _spec(tmp_path, ZABSZ)]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["class"] == "superattracting" and out["d"] == 1 and out["simple"] is True
    assert main(["analyze", _spec(tmp_path, SUPERREP)]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["class"] == "superrepelling" and out["d"] == 2


def test_unreadable_spec_exits_2(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["analyze", str(bad)]) == 2
    assert main(["linearize", _spec(tmp_path, {"kind": "unknown"})]) == 2
    assert main(["verify", str(tmp_path / "missing.json")]) == 2


def test_linearize_koenigs_example(tmp_path):
    out = tmp_path / "out.json"
    grid = tmp_path / "grid.csv"
    code = main(["linearize", _spec(tmp_path, KOENIGS), "-o", str(out), "--grid-csv", str(grid)])
    assert code == 0
    payload = json.loads(out.read_text())
    assert payload["ok"] and payload["conjugacy"]["residual"] < 1e-6
    assert payload["fixed_class"] == "geometrically_attracting"
    with open(grid) as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["z_re", "z_im", "psi_re", "psi_im"] and len(rows) > 100


def test_failed_closeness_hypothesis_exits_4(tmp_path, capsys):
    assert main(["linearize", _spec(tmp_path, OFFSET)]) == 4
    assert "hypothesis (a) failed" in capsys.readouterr().err


def test_wrong_mode_exits_5(tmp_path, capsys):
    assert main(["linearize", _spec(tmp_path, KOENIGS), "--mode", "repelling"]) == 5
    assert "DomainEscapeError" in capsys.readouterr().err


def test_residual_above_tolerance_exits_5(tmp_path):
    assert main(["linearize", _spec(tmp_path, KOENIGS), "--residual-tol", "1e-30"]) == 5


@pytest.mark.parametrize("record,oracle", [(KOENIGS, "Königs agreement"),
                                           (BOETTCHER, "Böttcher agreement"),
                                           (ZABSZ, "identity conjugacy")])
def test_verify_passes(tmp_path, capsys, record, oracle):
    assert main(["verify", _spec(tmp_path, record)]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert all(line.startswith("PASS") for line in lines)
    assert any(oracle in line for line in lines)


def test_verify_reports_failure_with_exit_1(tmp_path, capsys):
    assert main(["verify", _spec(tmp_path, OFFSET)]) == 1
    assert capsys.readouterr().out.startswith("FAIL")


def test_outputs_are_byte_identical_across_runs(tmp_path):
    spec = _spec(tmp_path, BOETTCHER)
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert main(["linearize", spec, "-o", str(a), "--seed", "3"]) == 0
    assert main(["linearize", spec, "-o", str(b), "--seed", "3"]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "qrlin", "analyze", _spec(tmp_path, ZABSZ)],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and '"superattracting"' in proc.stdout
