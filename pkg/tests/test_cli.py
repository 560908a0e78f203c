import json
import subprocess
import sys

import pytest

from gdx.builtins import shapley
from gdx.cli import main, resolve_game
from gdx.io import load_game, save_game


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_analyze_shapley_text(capsys):
    code, out, _ = run(capsys, "analyze", "shapley")
    assert code == 0
    assert "sink equilibria: 1" in out
    assert "verdict: stable, lambda = 272.89" in out


def test_analyze_machine_byte_identical(capsys):
    outs = [run(capsys, "analyze", "jordan", "--format", "machine", "--no-timings")[1] for _ in range(2)]
    assert outs[0] == outs[1]
    doc = json.loads(outs[0])
    assert "timings" not in doc
    (walk,) = [w for w in doc["walks"] if w["is_sink"]]
    assert walk["verdict"]["status"] == "stable"


def test_analyze_simulate(capsys):
    code, out, _ = run(capsys, "analyze", "shapley", "--simulate", "--scales", "10,100", "--format", "machine")
    doc = json.loads(out)
    (walk,) = doc["walks"]
    assert walk["brd_confirmation"]["follows_walk"]
    errs = [r["error"] for r in walk["rd_probe"]]
    assert errs[1] < errs[0]
    assert "timings" in doc


def test_builtin_with_parameters(capsys):
    code, out, _ = run(capsys, "analyze", "jordan_weighted:1,2,3")
    assert code == 0 and "verdict: stable" in out


def test_game_file_round_trip(tmp_path, capsys):
    path = tmp_path / "s.json"
    assert run(capsys, "builtin", "shapley", "-o", str(path))[0] == 0
    assert load_game(path) == shapley()
    assert resolve_game(str(path)) == shapley()


def test_random_and_graph(tmp_path, capsys):
    path = tmp_path / "r.json"
    assert run(capsys, "random", "--dims", "3,3", "--seed", "4", "-o", str(path))[0] == 0
    code, out, _ = run(capsys, "graph", str(path))
    assert code == 0 and out.startswith("digraph")
    code, out, _ = run(capsys, "graph", str(path), "--format", "machine")
    assert json.loads(out)["arcs"]


def test_simulate_brd_and_rd(tmp_path, capsys):
    csv_path = tmp_path / "t.csv"
    code, out, _ = run(
        capsys, "simulate", "matching_pennies", "--w0", "1,0,0.5,0", "--switches", "12",
        "--csv", str(csv_path), "--format", "machine",
    )
    doc = json.loads(out)
    assert code == 0 and doc["switches"] == 12 and len(doc["period"]) == 4
    assert len(csv_path.read_text().splitlines()) == 13
    ivs = tmp_path / "iv.csv"
    code, out, _ = run(capsys, "simulate", "shapley", "--dynamic", "rd", "--t-end", "50", "--intervals", str(ivs))
    assert code == 0 and ivs.read_text().startswith("profile,entry,exit")


@pytest.mark.parametrize(
    "argv",
    [
        ["analyze", "no_such_game"],
        ["simulate", "shapley", "--w0", "1,2"],
        ["random", "--dims", "1,3"],
        ["analyze", "jordan_weighted:x"],
    ],
)
def test_schema_errors_exit_2(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 2 and err.startswith("gdx: ")


def test_bad_game_file_exit_2(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text('{"schema_version": 1}')
    code, _, err = run(capsys, "analyze", str(path))
    assert code == 2 and "missing field" in err


def test_usage_error_exit_2():
    with pytest.raises(SystemExit) as e:
        main(["analyze"])
    assert e.value.code == 2


def test_console_entry_point(tmp_path):
    path = tmp_path / "p.json"
    proc = subprocess.run(
        [sys.executable, "-m", "gdx.cli", "builtin", "matching_pennies", "-o", str(path)],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0
    save_game(load_game(path), tmp_path / "again.json")
    assert (tmp_path / "again.json").read_text() == path.read_text()
