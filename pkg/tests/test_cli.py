import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from quadzip import cli
from quadzip.cli import EXIT_AMBIGUOUS, EXIT_FAIL, EXIT_IO, EXIT_OK, main


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def snapshot(folder):
    return {p.name: p.read_bytes() for p in sorted(folder.iterdir())}


@pytest.fixture(scope="module")
def zipped(tmp_path_factory):
    out = tmp_path_factory.mktemp("zip")
    assert main(["zip", "--domain", "annulus:0.5", "--out", str(out), "--tol", "1e-4",
                 "--base", "0.7", "--grid", "512"]) == EXIT_OK
    return out


def test_kernels_disc(tmp_path):
    assert main(["kernels", "--domain", "disc", "--out", str(tmp_path), "--grid", "128"]) == EXIT_OK
    rep = json.loads((tmp_path / "report.json").read_text())
    assert all(c["pass"] for c in rep["checks"].values())
    assert read_csv(tmp_path / "fprime.csv") == []
    rows = read_csv(tmp_path / "szego.csv")
    assert len(rows) == 128


def test_kernels_annulus(tmp_path):
    assert main(["kernels", "--domain", "annulus:0.5", "--out", str(tmp_path)]) == EXIT_OK
    rep = json.loads((tmp_path / "report.json").read_text())
    assert np.array(rep["period_matrix"]).shape[:2] == (1, 1)


def test_quadratize_annulus(tmp_path):
    code = main(["quadratize", "--domain", "annulus:0.5", "--out", str(tmp_path), "--tol", "1e-4",
                 "--base", "0.7", "--max-degree", "10"])
    assert code == EXIT_OK
    rep = json.loads((tmp_path / "report.json").read_text())
    assert rep["pass"]
    nodes = read_csv(tmp_path / "nodes.csv")
    assert len(nodes) == len(json.loads((tmp_path / "quadrature.json").read_text())["nodes"])
    assert (tmp_path / "fit_history.csv").exists()


def test_thm17_stagnation_exit_code(tmp_path):
    code = main(["quadratize", "--domain", "annulus:0.5", "--out", str(tmp_path),
                 "--variant", "thm17", "--w0", "0.7", "--eps", "0.05", "--tol", "1e-4"])
    assert code == EXIT_FAIL


def test_thm17_needs_disc(tmp_path):
    assert main(["quadratize", "--domain", "disc", "--out", str(tmp_path),
                 "--variant", "thm17"]) == EXIT_IO


def test_invalid_tolerance(tmp_path):
    assert main(["kernels", "--domain", "disc", "--out", str(tmp_path), "--tol", "-1"]) == EXIT_IO


def test_bad_grid(tmp_path):
    assert main(["kernels", "--domain", "disc", "--out", str(tmp_path), "--grid", "100"]) == EXIT_IO


def test_malformed_domain_file(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["kernels", "--domain", str(bad), "--out", str(tmp_path / "o")]) == EXIT_IO
    assert main(["kernels", "--domain", str(tmp_path / "missing.json"),
                 "--out", str(tmp_path / "o")]) == EXIT_IO


def test_unknown_argument_exits_two():
    with pytest.raises(SystemExit) as info:
        main(["kernels", "--nope"])
    assert info.value.code == 2


def test_zip_unzip(zipped, tmp_path):
    rep = json.loads((zipped / "report.json").read_text())
    assert rep["compression_ratio"] > 100
    assert main(["unzip", str(zipped / "archive.json"), "--out", str(tmp_path)]) == EXIT_OK
    rep = json.loads((tmp_path / "report.json").read_text())
    assert rep["pass"]
    assert len(read_csv(tmp_path / "unzip.csv")) == 20


def test_truncated_archive(zipped, tmp_path):
    text = (zipped / "archive.json").read_text()
    cut = tmp_path / "cut.json"
    cut.write_text(text[: len(text) // 3])
    assert main(["unzip", str(cut), "--out", str(tmp_path / "o")]) == EXIT_IO
    doc = json.loads(text)
    doc["meta"]["tol"] = 1.0
    bad = tmp_path / "tampered.json"
    bad.write_text(json.dumps(doc))
    assert main(["unzip", str(bad), "--out", str(tmp_path / "o")]) == EXIT_IO


def test_algebraic_disc(tmp_path):
    assert main(["algebraic", "--domain", "disc", "--out", str(tmp_path)]) == EXIT_OK
    rep = json.loads((tmp_path / "report.json").read_text())
    assert rep["boundary_relation"]["degree"] == 2
    assert (tmp_path / "singular_values.csv").exists()


def test_algebraic_ambiguous(tmp_path):
    code = main(["algebraic", "--domain", "blob:3:7", "--out", str(tmp_path), "--max-degree", "3"])
    assert code == EXIT_AMBIGUOUS


def test_deterministic_outputs(tmp_path):
    args = ["quadratize", "--domain", "annulus:0.5", "--tol", "1e-3", "--seed", "3"]
    assert main(args + ["--out", str(tmp_path / "a")]) == EXIT_OK
    assert main(args + ["--out", str(tmp_path / "b"), "--threads", "1"]) == EXIT_OK
    assert snapshot(tmp_path / "a") == snapshot(tmp_path / "b")


def test_atomic_write_leaves_no_temporaries(tmp_path):
    cli.write_json(tmp_path / "x.json", {"a": 1.5})
    cli.write_json(tmp_path / "x.json", {"a": 2.5})
    assert [p.name for p in tmp_path.iterdir()] == ["x.json"]
    assert json.loads((tmp_path / "x.json").read_text()) == {"a": 2.5}


def test_thread_env_variable(monkeypatch, tmp_path):
    monkeypatch.setenv(cli.ENV_THREADS, "1")
    ns = cli.build_parser().parse_args(["kernels", "--domain", "disc", "--out", str(tmp_path)])
    assert cli.config_from_args(ns).threads == 1
    monkeypatch.setenv(cli.ENV_THREADS, "many")
    assert main(["kernels", "--domain", "disc", "--out", str(tmp_path)]) == EXIT_IO


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "quadzip", "kernels", "--domain", "disc",
                           "--grid", "64", "--out", str(tmp_path)], capture_output=True)
    assert proc.returncode == 0, proc.stderr
