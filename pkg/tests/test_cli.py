import csv
import io
import json
import subprocess
import sys

import pytest

from mobius_va.cli import EXIT_CONFIG, EXIT_FAIL, EXIT_OK, EXIT_TRUNCATED, SUITES, main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_verify_heisenberg_json(capsys, tmp_path):
    code, out, _ = run(capsys, "verify", "--model", "heisenberg", "--depth", "3", "--json", "--out-dir", str(tmp_path))
    assert code == EXIT_OK
    data = json.loads(out)
    assert data["schema_version"] == "1.0"
    assert [s["suite"] for s in data["suites"]] == list(SUITES)
    assert "timings" not in data["suites"][0]
    assert (tmp_path / "report.json").read_text() == out


def test_verify_failure_reports_witness(capsys):
    code, out, err = run(capsys, "verify", "--model", "virasoro", "--c", "-1", "--depth", "4", "--suite", "unitarity")
    assert code == EXIT_FAIL
    assert "positivity" in err and '"level": 2' in err and "-1/2" in err


def test_degenerate_gram_is_config_error(capsys):
    code, _, err = run(capsys, "verify", "--model", "virasoro", "--c", "1/2", "--depth", "6", "--null", "raise")
    assert code == EXIT_CONFIG and "--null" in err


@pytest.mark.parametrize(
    "argv,dims",
    [
        (["--model", "heisenberg", "--depth", "4"], [1, 1, 2, 3, 5]),
        (["--model", "virasoro", "--c", "1/2", "--depth", "6"], [1, 0, 1, 1, 2, 2, 4]),
        (["--model", "virasoro", "--c", "1/2", "--depth", "6", "--null", "quotient"], [1, 0, 1, 1, 2, 2, 3]),
    ],
)
def test_build_dims(capsys, argv, dims):
    code, out, _ = run(capsys, "build", *argv, "--json")
    data = json.loads(out)
    assert code == EXIT_OK and data["dims"] == dims
    assert data["generators"][0]["locality_order"] == 2 * data["generators"][0]["weight"]


def test_universal_ising_module_fails_only_positivity(capsys):
    code, out, err = run(capsys, "verify", "--model", "virasoro", "--c", "1/2", "--depth", "6", "--json")
    data = json.loads(out)
    failing = [c["name"] for s in data["suites"] for c in s["checks"] if c["status"] == "fail"]
    assert code == EXIT_FAIL and failing == ["positivity"]
    assert "level" in err


def test_suite_routing(capsys):
    code, out, _ = run(capsys, "verify", "--model", "heisenberg", "--depth", "3", "--suite", "locality", "--json")
    assert code == EXIT_OK
    assert [s["suite"] for s in json.loads(out)["suites"]] == ["locality"]


def test_truncation_exit_code(capsys):
    # a closure budget too small to reach every degree
    code, _, err = run(capsys, "verify", "--model", "heisenberg", "--depth", "4", "--budget", "2")
    assert code == EXIT_TRUNCATED and "truncation" in err


@pytest.mark.parametrize(
    "text,needle",
    [
        ('{"model": {"kind": "heisenberg", "depth": 4,}}', "line 1, column"),
        ('{\n  "model": {"kind": "heisenberg", "depth": "x"}\n}', "model.depth"),
        ('{"model": {"kind": "virasoro", "depth": 4, "c": 0.5}}', "model.c"),
        ('{"model": {"kind": "heisenberg", "depth": 4}, "colour": 1}', "colour"),
        ('{"model": {"kind": "heisenberg", "depth": 4}, "suites": ["nope"]}', "suite"),
        ('{"model": {"kind": "heisenberg", "depth": 4}, "tolerance": -1}', "tolerance"),
    ],
)
def test_config_diagnostics(capsys, tmp_path, text, needle):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(text)
    code, _, err = run(capsys, "verify", "--config", str(cfg))
    assert code == EXIT_CONFIG
    assert needle in err


def test_flags_override_config(capsys, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"model": {"kind": "heisenberg", "depth": 6}, "suites": ["locality"]}))
    code, out, _ = run(capsys, "build", "--config", str(cfg), "--depth", "2", "--json")
    assert code == EXIT_OK
    assert json.loads(out)["dims"] == [1, 1, 2]


def test_smear_outputs(capsys, tmp_path):
    code, out, _ = run(
        capsys, "smear", "--model", "heisenberg", "--depth", "8", "--cutoffs", "16,32", "--csv", "--out-dir", str(tmp_path)
    )
    assert code == EXIT_OK
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == ["cutoff", "residual", "same_support_residual"]
    assert [r[0] for r in rows[1:]] == ["16", "32"]
    for name in ("decay.csv", "order.csv", "covariance.csv", "summary.json"):
        assert (tmp_path / name).exists()
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert summary["order_estimate"]["order"] == 2
    assert summary["covariance"]["pass"]


def test_smear_identity_is_zero(capsys):
    code, out, _ = run(capsys, "smear", "--model", "heisenberg", "--depth", "6", "--field", "identity", "--cutoffs", "8,16", "--csv")
    rows = list(csv.reader(io.StringIO(out)))[1:]
    assert code == EXIT_OK
    assert all(float(r[1]) == 0.0 and float(r[2]) == 0.0 for r in rows)


def test_smear_overlap_is_config_error(capsys):
    code, _, err = run(capsys, "smear", "--model", "heisenberg", "--depth", "6", "--g-bump", "1.5,0.8")
    assert code == EXIT_CONFIG and "intersect" in err


def test_bad_cutoffs(capsys):
    code, _, err = run(capsys, "smear", "--model", "heisenberg", "--depth", "6", "--cutoffs", "32,16")
    assert code == EXIT_CONFIG and "cutoffs" in err


def test_threads_do_not_change_output(capsys, monkeypatch):
    args = ("verify", "--model", "heisenberg", "--depth", "3", "--json")
    monkeypatch.setenv("VOA_THREADS", "1")
    _, one, _ = run(capsys, *args)
    monkeypatch.setenv("VOA_THREADS", "4")
    _, four, _ = run(capsys, *args)
    assert one == four


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "mobius_va", "build", "--model", "heisenberg", "--depth", "2", "--json"],
        capture_output=True,
        text=True,
        check=False,
    )
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["dims"] == [1, 1, 2]
