import hashlib
import json
from pathlib import Path

import jsonschema
import pytest

from ginibre_loops.cli import DEFAULTS, OUT_ENV, build_parser, main, resolve
from ginibre_loops.verify import REPORT_SCHEMA


def only_run(root: Path) -> Path:
    (run,) = [p for p in root.iterdir() if p.is_dir()]
    return run


def test_solve_writes_manifest(tmp_path, capsys):
    assert main(["--out-dir", str(tmp_path), "solve", "--chi-max", "2"]) == 0
    run = only_run(tmp_path)
    assert run.name.startswith("solve-")
    manifest = json.loads((run / "manifest.json").read_text())
    assert manifest["exit_status"] == 0 and manifest["config"]["chi_max"] == 2
    for name, digest in manifest["files"].items():
        assert hashlib.sha256((run / name).read_bytes()).hexdigest() == digest
    table = json.loads((run / "table.json").read_text())
    assert set(table) == {"0,1", "0,2", "1,1", "0,3", "1,2", "0,4"}
    assert "w_1,1(z)" in (run / "table.txt").read_text()
    assert "(1,1)" in capsys.readouterr().out


def test_enumerate_maps(tmp_path, capsys):
    assert main(["--out-dir", str(tmp_path), "enumerate-maps", "--M", "2", "--profile", "2"]) == 0
    out = capsys.readouterr().out
    assert "cumulant: 3*N + N^-1" in out
    rows = (only_run(tmp_path) / "genus_counts.csv").read_text().splitlines()
    assert rows == ["genus,count", "0,3", "1,1"]


def test_moments_json(tmp_path, capsys):
    assert main(["--out-dir", str(tmp_path), "moments", "--chi-max", "1", "--max-order", "3",
                 "--conjecture-order", "3", "--format", "json"]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert rep["status"].startswith("conjectures consistent")
    csv_text = (only_run(tmp_path) / "cumulants.csv").read_text()
    assert "0,1 1,3,resolvent-residue" in csv_text


def test_density(tmp_path, capsys):
    assert main(["--out-dir", str(tmp_path), "density", "--points", "5", "--lo", "1", "--hi", "2"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "x,rho" and len(lines) == 6


def test_montecarlo_small(tmp_path, capsys):
    code = main(["--out-dir", str(tmp_path), "montecarlo", "--N", "10", "--N", "14", "--samples", "300",
                 "--format", "json"])
    out = json.loads(capsys.readouterr().out)
    assert code == 0
    assert set(out["ladder"]) == {"10", "14"}
    assert (only_run(tmp_path) / "estimates.json").exists()


def test_env_out_dir(tmp_path, monkeypatch):
    monkeypatch.setenv(OUT_ENV, str(tmp_path / "envroot"))
    assert main(["enumerate-maps", "--profile", "1"]) == 0
    assert only_run(tmp_path / "envroot").name.startswith("enumerate-maps-")


def test_config_precedence(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("samples = 150\nseed = 9\nN = [12, 16, 20]\n")
    args = build_parser().parse_args(["montecarlo", "--config", str(cfg), "--samples", "400"])
    merged = resolve(args, "montecarlo")
    assert merged["samples"] == 400
    assert merged["seed"] == 9 and merged["N"] == [12, 16, 20]
    assert merged["kmax"] == DEFAULTS["montecarlo"]["kmax"]


def test_rejects_non_positive():
    args = build_parser().parse_args(["solve", "--chi-max", "0"])
    with pytest.raises(SystemExit):
        resolve(args, "solve")


def test_verify_fast_and_schema(tmp_path):
    assert main(["--out-dir", str(tmp_path), "verify", "--fast"]) == 0
    rep = json.loads((only_run(tmp_path) / "report.json").read_text())
    jsonschema.validate(rep, REPORT_SCHEMA)
    assert rep["ok"] and all(c["ok"] for c in rep["checks"])
    assert all(c["anchor"] for c in rep["checks"])


def test_verify_mutation_fails_w11(tmp_path):
    assert main(["--out-dir", str(tmp_path), "verify", "--fast", "--genus-offset", "-2"]) == 1
    rep = json.loads((only_run(tmp_path) / "report.json").read_text())
    checks = {c["name"]: c["ok"] for c in rep["checks"]}
    assert checks["golden w_1,1"] is False
    assert checks["golden w_0,1"] is True
