import json
import os
from importlib import resources

import pytest

from fibercert.cli import main

DATA = resources.files("fibercert") / "data"
R1 = str(DATA / "rose_r1.json")
R2 = str(DATA / "rose_r2.json")


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


# -- ingest / charpoly / omega / oracle ---------------------------------------

def test_ingest(capsys, r1_hash):
    code, out, _ = run(capsys, "ingest", R1)
    assert code == 0
    assert f"dataset_hash: {r1_hash}" in out
    assert "rank: 1" in out
    assert "inverse_data: yes" in out


def test_ingest_missing_file(capsys):
    with pytest.raises(SystemExit):
        main(["ingest"])  # argparse: missing positional
    with pytest.raises(FileNotFoundError):
        main(["ingest", "/nonexistent.json"])


def test_charpoly(capsys):
    code, out, _ = run(capsys, "charpoly", R1, "--p", "1")
    assert code == 0
    d = json.loads(out)
    assert d["dim"] == 2 and d["rank"] == 1
    # F(x, t) = x^2 - (2 + t) x + (t - t) ... constant term det(M) exactly.
    coeffs = d["coefficients"]
    assert coeffs[0] == [[[0], 1]]  # leading (-1)^2 x^2


def test_omega_matches_oracle(capsys):
    code_a, out_a, _ = run(capsys, "omega", R1, "--p", "5")
    code_b, out_b, _ = run(capsys, "oracle", R1, "--p", "5")
    assert code_a == code_b == 0
    a, b = json.loads(out_a), json.loads(out_b)
    assert a["points"] == b["points"]
    assert a["points"] == [[x] for x in range(0, 6)]


def test_oracle_budget_exit_code(capsys):
    code, _, err = run(capsys, "oracle", R2, "--p", "12", "--budget", "100")
    assert code == 1
    assert "error:" in err


# -- cone ---------------------------------------------------------------------

def test_cone(capsys):
    code, out, _ = run(capsys, "cone", R1, "--p-max", "12")
    assert code == 0
    d = json.loads(out)
    assert d["k0"] == 1 and d["C"] == 1
    assert not d["low_confidence"]
    slopes = {tuple(f["u"]): f["slope"] for f in d["facets"]}
    assert slopes[(1,)] == "1/1"
    assert slopes[(-1,)] == "0/1"
    assert d["fibered_cone_generators"] == [[0, 1], [1, 1]]


# -- bound / verify ------------------------------------------------------------

def test_bound_and_verify_round_trip(capsys, tmp_path):
    cert_path = str(tmp_path / "cert.json")
    code, out, _ = run(capsys, "bound", R1, "--alpha", "1,9",
                       "--p-max", "12", "--out", cert_path)
    assert code == 0
    d = json.loads(out)
    assert d["status"] == "ok" and d["mode"] == "certified"
    assert d["K"] >= 1
    assert open(cert_path).read() == out

    code, out, _ = run(capsys, "verify", cert_path, "--dataset", R1)
    assert code == 0
    assert "verification: pass" in out

    # Verifying against the wrong dataset fails with exit code 3.
    code, out, _ = run(capsys, "verify", cert_path, "--dataset", R2)
    assert code == 3
    assert "dataset-hash" in out


def test_bound_inconclusive_exit_code(capsys):
    # n = 7 is covered by kernel obstacles: inconclusive, exit 2.
    code, out, err = run(capsys, "bound", R1, "--alpha", "1,7", "--p-max", "12")
    assert code == 2
    assert json.loads(out)["status"] == "inconclusive"
    assert "inconclusive" in err


def test_bound_exterior_class_exit_code(capsys):
    code, _, err = run(capsys, "bound", R1, "--alpha=-5,1", "--p-max", "8")
    assert code == 1
    assert "error:" in err


def test_bound_r2_requires_mirror(capsys):
    code, _, err = run(capsys, "bound", R2, "--alpha", "1,9,82",
                       "--p-max", "10")
    assert code == 1
    assert "mirror" in err
    code, out, _ = run(capsys, "bound", R2, "--alpha", "1,9,82",
                       "--p-max", "10", "--mirror")
    assert code in (0, 2)
    assert json.loads(out)["alpha"] == [1, 9, 82]


# -- support cache --------------------------------------------------------------

def test_omega_cache_round_trip(capsys, tmp_path, monkeypatch):
    cache_dir = str(tmp_path / "cache")
    code, out1, _ = run(capsys, "omega", R1, "--p", "4", "--cache-dir", cache_dir)
    assert code == 0
    files = os.listdir(cache_dir)
    assert files  # supports were flushed
    code, out2, _ = run(capsys, "omega", R1, "--p", "4", "--cache-dir", cache_dir)
    assert code == 0
    assert out1 == out2
    # The environment variable is honored too.
    monkeypatch.setenv("FIBERCERT_CACHE_DIR", cache_dir)
    code, out3, _ = run(capsys, "omega", R1, "--p", "4")
    assert code == 0
    assert out3 == out1


def test_omega_cache_corruption_detected(capsys, tmp_path):
    cache_dir = str(tmp_path / "cache")
    code, _, _ = run(capsys, "omega", R1, "--p", "3", "--cache-dir", cache_dir)
    assert code == 0
    # Corrupt every stored support, then rerun: the seeded spot check must
    # notice the disagreement with a fresh recomputation.
    for name in os.listdir(cache_dir):
        path = os.path.join(cache_dir, name)
        pts = json.load(open(path))
        pts.append([999])
        json.dump(pts, open(path, "w"))
    code, _, err = run(capsys, "omega", R1, "--p", "3", "--cache-dir", cache_dir)
    assert code == 1
    assert "cache corruption" in err


# -- sweep --------------------------------------------------------------

def test_sweep_csv_and_determinism(capsys):
    argv = ["sweep", R1, "--base", "1,9", "--direction", "0,2",
            "--start", "0", "--stop", "6", "--p-max", "12", "--format", "csv"]
    code, out1, _ = run(capsys, *argv)
    assert code == 0
    lines = out1.strip().splitlines()
    assert lines[0].startswith("alpha,n,covol2,")
    assert len(lines) == 7
    # Byte-identical across repeats and thread counts.
    _, out2, _ = run(capsys, *argv)
    _, out3, _ = run(capsys, *(argv + ["--threads", "4"]))
    assert out1 == out2 == out3


def test_sweep_explicit_classes_text(capsys):
    code, out, _ = run(capsys, "sweep", R1, "--classes", "[[1, 9], [-5, 1]]",
                       "--p-max", "10", "--format", "text")
    assert code == 0
    lines = out.strip().splitlines()
    assert "status=ok" in lines[0]
    assert "status=skipped-exterior" in lines[1]


def test_sweep_validation(capsys):
    code, _, err = run(capsys, "sweep", R1, "--base", "1,9",
                       "--direction", "2", "--p-max", "8")
    assert code == 1
    assert "equal length" in err
