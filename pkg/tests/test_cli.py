import json
import shutil
import subprocess
import sys

import pytest

from tilekit.cli import main
from tilekit.graphcore import catlin_graph, load_graph


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def catlin33(tmp_path):
    path = tmp_path / "c33.json"
    path.write_text(catlin_graph(3, 3).to_json())
    return path


def test_gen_and_tau(tmp_path, capsys):
    path = tmp_path / "g.json"
    code, _, _ = run(capsys, "gen", "--k", 3, "--n", 4, "--seed", 2, "-o", path)
    assert code == 0 and load_graph(path).k == 3
    code, out, _ = run(capsys, "tau", path, "--rule", "dantzig")
    assert code == 0 and json.loads(out)["tau"] == "4/1"


def test_tau_on_catlin(catlin33, capsys):
    code, out, _ = run(capsys, "tau", catlin33)
    rep = json.loads(out)
    assert rep["tau"] == "3/1" and len(rep["dual"]) == 9


def test_tile_none_and_tiling(catlin33, tmp_path, capsys):
    assert json.loads(run(capsys, "tile", catlin33)[1]) == {"result": "none"}
    path = tmp_path / "c36.json"
    path.write_text(catlin_graph(3, 6).to_json())
    rep = json.loads(run(capsys, "tile", path)[1])
    assert rep["result"] == "tiling" and len(rep["tiles"]) == 6


def test_tile_capacity(tmp_path, capsys):
    path = tmp_path / "g.json"
    run(capsys, "gen", "--k", 4, "--n", 10, "--p", 1.0, "-o", path)
    assert json.loads(run(capsys, "tile", path)[1])["result"] == "capacity"


def test_reach(tmp_path, capsys):
    path = tmp_path / "g.json"
    run(capsys, "gen", "--k", 2, "--n", 4, "--p", 1.0, "-o", path)
    code, out, _ = run(capsys, "reach", path, "--i", 1, "--j", 3)
    rep = json.loads(out)
    assert code == 0 and len(rep["T1"]) == 2 and rep["T1"][1] == rep["T2"][1]


def test_reach_precondition_exit_code(catlin33, capsys):
    code, _, err = run(capsys, "reach", catlin33, "--i", 1, "--j", 2)
    assert code == 1 and "no perfect" in err


def test_certify(catlin33, capsys):
    rep = json.loads(run(capsys, "certify", catlin33, "--pair", 1, 2, "--eps", "1/2")[1])
    assert rep["result"] in {"certified", "not-certified"}
    rep = json.loads(run(capsys, "certify", catlin33, "--pair", 1, 2, "--eps", "1")[1])
    assert rep["result"] == "certified" and rep["kind"] == "exact-exhaustive"


def test_slice_experiment_csv(capsys):
    code, out, err = run(capsys, "slice-experiment", "--L", 120, "--Lprime", 60, "--d", "1/2",
                         "--eps", "3/10", "--trials", 2, "--seed", 1)
    lines = out.splitlines()
    assert code == 0 and lines[0] == "trial,failures,good_pair_min,bound" and len(lines) == 3
    assert "d outside" in err


def test_run_config(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"scenarios": ["gap-witness"], "k": 3}))
    code, out, _ = run(capsys, "run", cfg, "--out", tmp_path / "out")
    assert code == 0 and json.loads(out)["scenarios"][0]["rows"] == 2
    assert (tmp_path / "out" / "gap-witness.csv").exists()


def test_bad_inputs(tmp_path, capsys):
    assert run(capsys, "tau", tmp_path / "missing.json")[0] == 1
    bad = tmp_path / "bad.json"
    bad.write_text("{")
    assert run(capsys, "tau", bad)[0] == 1
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"scenario": "unknown"}))
    code, _, err = run(capsys, "run", cfg)
    assert code == 1 and "unknown scenario" in err


@pytest.mark.skipif(shutil.which("tilekit") is None, reason="console script not installed")
def test_console_script():
    out = subprocess.run(["tilekit", "--help"], capture_output=True, text=True, check=True)
    assert "slice-experiment" in out.stdout


def test_module_entry():
    out = subprocess.run([sys.executable, "-m", "tilekit.cli", "gen", "--k", "3", "--n", "3", "--catlin"],
                         capture_output=True, text=True, check=True)
    assert json.loads(out.stdout)["k"] == 3
