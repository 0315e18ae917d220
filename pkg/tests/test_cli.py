import csv
import json
import subprocess
import sys

import pytest

from sscmo.cli import EXIT_OK, EXIT_SOLVER, EXIT_USAGE, _seeds, main
from sscmo.grid import ParetoFront
from sscmo.ssc.instance import SSCInstance


@pytest.fixture(scope="module")
def tiny_file(tmp_path_factory):
    path = tmp_path_factory.mktemp("inst") / "tiny.json"
    assert main(["generate", "--preset", "tiny", "--seed", "3", "--out", str(path)]) == EXIT_OK
    return path


@pytest.fixture(scope="module")
def exact_front_file(tiny_file):
    out = tiny_file.with_name("exact.json")
    assert main(["solve", "--method", "exact", "--grid", "4", "--in", str(tiny_file),
                 "--out", str(out)]) == EXIT_OK
    return out


def test_generate_is_deterministic(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for p in (a, b):
        assert main(["generate", "--seed", "7", "--periods", "3", "--profile", "STD",
                     "--out", str(p)]) == EXIT_OK
    assert a.read_bytes() == b.read_bytes()


def test_generate_to_stdout(capsys):
    assert main(["generate", "--preset", "tiny"]) == EXIT_OK
    doc = json.loads(capsys.readouterr().out)
    assert doc["schema"].startswith("sscmo.instance")


def test_solve_then_metrics_against_itself(exact_front_file, tmp_path, capsys):
    rep = tmp_path / "rep.json"
    assert main(["metrics", "--front", str(exact_front_file), "--ref", str(exact_front_file),
                 "--out", str(rep)]) == EXIT_OK
    doc = json.loads(rep.read_text())
    assert doc["r2"] == 0.0
    assert set(doc) == {"amid", "asns", "r2", "n_points", "ideal"}


def test_front_outputs_deterministic(tiny_file, exact_front_file):
    again = exact_front_file.with_name("again.json")
    assert main(["solve", "--method", "exact", "--grid", "4", "--in", str(tiny_file),
                 "--out", str(again)]) == EXIT_OK
    strip = lambda p: {k: v for k, v in json.loads(p.read_text()).items() if k != "timing"}
    assert strip(again) == strip(exact_front_file)


@pytest.mark.parametrize("method", ["lagr", "fix"])
def test_heuristic_fronts_validate(tiny_file, tmp_path, method, capsys):
    out = tmp_path / f"{method}.json"
    trace = tmp_path / "trace.jsonl"
    argv = ["solve", "--method", method, "--grid", "3", "--in", str(tiny_file), "--out", str(out)]
    if method == "lagr":
        argv += ["--trace", str(trace)]
    assert main(argv) == EXIT_OK
    assert ParetoFront.load(out).points
    assert main(["validate", "--in", str(tiny_file), "--front", str(out)]) == EXIT_OK
    assert capsys.readouterr().out.strip().endswith("ok")
    if method == "lagr":
        assert trace.read_text().strip()


def test_validate_flags_tampered_front(tiny_file, exact_front_file, tmp_path, capsys):
    doc = json.loads(exact_front_file.read_text())
    doc["points"][0]["f_eco_prime"] += 1000.0
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(doc))
    assert main(["validate", "--in", str(tiny_file), "--front", str(bad)]) == EXIT_USAGE
    assert "differs" in capsys.readouterr().out


def test_export_lp(tiny_file, tmp_path):
    out = tmp_path / "m.lp"
    assert main(["export-lp", "--in", str(tiny_file), "--objective", "soc",
                 "--out", str(out)]) == EXIT_OK
    text = out.read_text()
    assert text.startswith("\\") or "Minimize" in text
    assert "supmax(" in text and "reconstructed:" in text


def test_bench_on_tiny(tmp_path, capsys):
    assert main(["bench", "--preset", "tiny", "--profiles", "STD", "--periods", "2",
                 "--seeds", "1-2", "--grid", "3", "--out", str(tmp_path)]) == EXIT_OK
    table = capsys.readouterr().out
    assert table.splitlines()[0].split()[:3] == ["instance", "method", "points"]
    with open(tmp_path / "bench.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 6
    exact = [r for r in rows if r["method"] == "exact"]
    assert all(float(r["r2"]) == 0.0 for r in exact)


def test_seed_ranges():
    assert _seeds("1-3,7") == [1, 2, 3, 7]
    assert _seeds("4") == [4]


@pytest.mark.parametrize("argv", [
    [],
    ["solve", "--in", "x.json"],
    ["solve", "--method", "magic", "--in", "x", "--out", "y"],
    ["solve", "--in", "missing.json", "--out", "y.json"],
    ["solve", "--grid", "0", "--in", "x", "--out", "y"],
    ["generate", "--preset", "tiny", "--config", "c.cfg"],
    ["metrics", "--front", "missing.json"],
])
def test_usage_errors(argv, capsys):
    assert main(argv) == EXIT_USAGE
    assert "error" in capsys.readouterr().err


def test_solver_failure_exit_code(tiny_file, tmp_path):
    inst = SSCInstance.load(tiny_file)
    inst.arrays["dmd"] = inst.dmd * 1e6
    bad = tmp_path / "huge.json"
    inst.save(bad)
    assert main(["solve", "--method", "exact", "--grid", "2", "--in", str(bad),
                 "--out", str(tmp_path / "f.json")]) == EXIT_SOLVER


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "sscmo", "--help"], capture_output=True, text=True)
    assert r.returncode == 0 and "bench" in r.stdout
