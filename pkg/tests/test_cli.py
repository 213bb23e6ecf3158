import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from sfl_pohozaev.cli import main, strip_runtime

SMALL = """
seed = {seed}
n = 12
s_values = [0.3, 0.7]
classical_limit = true
suites = {suites}
psd_sizes = [4, 12]
write_matrices = {write}
output_dir = "out"

[[domains]]
name = "interval"
kind = "interval"
a = 0
b = "pi"

[[domains]]
name = "square"
kind = "rectangle"
a = 0
b = "pi"
c = 0
d = "pi"

[probe]
domain = "square"
s = 0.5
p = 5
n = 8

[semilinear]
domain = "square"
s = 0.5
p = 2
n = 8
{extra}
"""

ALL = '["identity", "psd", "bochner", "degenerate", "subordination", "semilinear", "probe"]'


def write_cfg(tmp_path, seed=5, suites=ALL, write="false", extra=""):
    p = tmp_path / "cfg.toml"
    p.write_text(SMALL.format(seed=seed, suites=suites, write=write, extra=extra))
    return p


def load(path):
    return json.loads(path.read_text())


def test_run_passes_and_writes_reports(tmp_path, capsys):
    cfg = write_cfg(tmp_path, write="true")
    assert main(["run", str(cfg)]) == 0
    rep = load(tmp_path / "out" / "report.json")
    assert [r["suite"] for r in rep["suites"]] == json.loads(ALL)
    assert all(r["verdict"] == "PASS" for r in rep["suites"])
    assert rep["summary"]["passed"] and set(rep["runtime"]["wall_clock_seconds"]) == set(json.loads(ALL))
    md = (tmp_path / "out" / "report.md").read_text()
    assert "| identity | PASS |" in md
    manifest = load(tmp_path / "out" / "matrices" / "matrices.json")
    assert {m["matrix"] for m in manifest} == {"Q1", "P", "Qs"}


def test_summary_numbers_present_in_json(tmp_path):
    cfg = write_cfg(tmp_path)
    main(["run", str(cfg)])
    rep = load(tmp_path / "out" / "report.json")
    md = (tmp_path / "out" / "report.md").read_text()
    for r in rep["suites"]:
        w = r["worst"]
        if isinstance(w["value"], float):
            assert f"{w['value']:.3e}" in md


def test_determinism_and_seed_override(tmp_path):
    cfg = write_cfg(tmp_path)
    assert main(["run", str(cfg), "--output-dir", str(tmp_path / "a")]) == 0
    assert main(["run", str(cfg), "--output-dir", str(tmp_path / "b")]) == 0
    a, b = load(tmp_path / "a" / "report.json"), load(tmp_path / "b" / "report.json")
    assert strip_runtime(a) == strip_runtime(b)
    assert main(["run", str(cfg), "--seed", "6", "--output-dir", str(tmp_path / "c")]) == 0
    c = load(tmp_path / "c" / "report.json")
    assert c["config"]["seed"] == 6 and strip_runtime(c) != strip_runtime(a)


def test_env_output_override(tmp_path, monkeypatch):
    cfg = write_cfg(tmp_path, suites='["bochner"]')
    monkeypatch.setenv("SFL_OUTPUT_DIR", str(tmp_path / "env"))
    assert main(["run", str(cfg)]) == 0
    assert (tmp_path / "env" / "report.json").exists()
    assert main(["run", str(cfg), "--output-dir", str(tmp_path / "flag")]) == 0
    assert (tmp_path / "flag" / "report.json").exists()


def test_bad_order_exit_2(tmp_path, capsys):
    p = tmp_path / "bad.toml"
    p.write_text('seed = 1\ns_values = [1.5]\n[domain]\nkind = "interval"\na = 0\nb = 1\n')
    assert main(["run", str(p)]) == 2
    assert "s must lie in (0,1)" in capsys.readouterr().err
    assert main(["run", str(tmp_path / "missing.toml")]) == 2


def test_unwritable_output_exit_2(tmp_path):
    cfg = write_cfg(tmp_path, suites='["bochner"]')
    blocker = tmp_path / "file"
    blocker.write_text("x")
    assert main(["run", str(cfg), "--output-dir", str(blocker / "sub")]) == 2


def test_empty_suite_selection(tmp_path, capsys):
    cfg = write_cfg(tmp_path, suites="[]")
    assert main(["run", str(cfg)]) == 0
    assert "no suites selected" in capsys.readouterr().err
    assert main(["explain", str(tmp_path / "out" / "report.json")]) == 0
    assert "no suites selected" in capsys.readouterr().out


def test_failing_psd_report_prints_witness(tmp_path, capsys):
    # a positive PSD tolerance turns the threshold above every eigenvalue: a forced failure
    cfg = write_cfg(tmp_path, suites='["psd"]', extra="[tolerances]\npsd = -1.0\n")
    assert main(["run", str(cfg)]) == 1
    capsys.readouterr()
    assert main(["explain", str(tmp_path / "out" / "report.json")]) == 1
    out = capsys.readouterr().out
    assert "| psd | FAIL |" in out
    assert "witness for" in out and "quadratic value" in out


def test_explain_passing_and_malformed(tmp_path, capsys):
    cfg = write_cfg(tmp_path)
    main(["run", str(cfg)])
    capsys.readouterr()
    assert main(["explain", str(tmp_path / "out" / "report.json")]) == 0
    out = capsys.readouterr().out
    assert out.count("| PASS |") == 7
    bad = tmp_path / "bad.json"
    bad.write_text('{"suites": 3}')
    assert main(["explain", str(bad)]) == 2
    bad.write_text("not json")
    assert main(["explain", str(bad)]) == 2
    assert main(["explain", str(tmp_path / "nope.json")]) == 2


def test_matrices_csv_format(tmp_path):
    cfg = write_cfg(tmp_path)
    assert main(["matrices", str(cfg), "--output-dir", str(tmp_path / "m")]) == 0
    raw = (tmp_path / "m" / "qs_square_s0.3.csv").read_bytes()
    assert raw.count(b"\r\n") == 13 and b"\n" not in raw.replace(b"\r\n", b"")
    with open(tmp_path / "m" / "qs_square_s0.3.csv", newline="") as fh:
        rows = list(csv.reader(fh))
    assert rows[0][:2] == ["row", "phi_1"] and rows[1][0] == "phi_1"
    vals = np.array([[float(x) for x in r[1:]] for r in rows[1:]])
    from sfl_pohozaev import matrices, rectangle_basis
    _, _, qs = matrices(rectangle_basis(0, np.pi, 0, np.pi, 12), 0.3)
    assert np.array_equal(vals, qs)  # 17 significant digits round-trip exactly
    manifest = load(tmp_path / "m" / "matrices.json")
    entry = next(m for m in manifest if m["file"] == "qs_square_s0.3.csv")
    assert entry["n"] == 12 and entry["s"] == 0.3 and len(entry["basis"]) == 16


def test_module_entry_point(tmp_path):
    cfg = write_cfg(tmp_path, suites='["bochner"]')
    res = subprocess.run([sys.executable, "-m", "sfl_pohozaev", "run", str(cfg)], capture_output=True, text=True)
    assert res.returncode == 0, res.stderr
    assert "bochner" in res.stdout and "PASS" in res.stdout


def test_non_star_domain_is_reported_not_graded(tmp_path):
    # a square viewed from outside its left edge: x.nu < 0 there
    extra = ('[[domains]]\nname = "off"\nkind = "rectangle"\na = 0\nb = 1\nc = 0\nd = 1\n'
             'star_center = [-0.5, 0.5]\n')
    cfg = write_cfg(tmp_path, suites='["psd"]', extra=extra)
    assert main(["run", str(cfg)]) == 0
    items = [it for it in load(tmp_path / "out" / "report.json")["suites"][0]["items"] if it["domain"] == "off"]
    star = next(it for it in items if it["check"] == "star_shaped")
    assert star["value"] < 0 and star["graded"] is False
    qs = [it for it in items if it["check"] in ("psd_q1", "psd_qs")]
    assert qs and all(it["graded"] is False and "certificate" in it for it in qs)
    assert all(it["passed"] for it in items if it["check"] == "psd_p")
    assert all("graded" not in it for it in items if it["check"] == "psd_p")
