import json

import numpy as np
import pytest

from roughpaths.cli import main


def run(tmp_path, command, config=None, seed=None, name="out"):
    argv = [command, "--out", str(tmp_path / name)]
    if config is not None:
        cfg_path = tmp_path / f"{name}.json"
        cfg_path.write_text(json.dumps(config))
        argv += ["--config", str(cfg_path)]
    if seed is not None:
        argv += ["--seed", str(seed)]
    return main(argv)


def test_convergence_command(tmp_path, capsys):
    assert run(tmp_path, "convergence") == 0
    text = capsys.readouterr().out
    assert "PASS" in text and "FAIL" not in text
    table = (tmp_path / "out" / "convergence.csv").read_text()
    assert table.startswith("mesh,sup_error,order")


def test_convergence_zero_problem(tmp_path):
    assert run(tmp_path, "convergence",
               {"problem": "zero", "meshes": [64, 128]}) == 0


def test_convergence_matrix_problem(tmp_path):
    assert run(tmp_path, "convergence",
               {"problem": "matrix", "meshes": [128, 256, 512, 1024]}) == 0


def test_growth_demo_command(tmp_path):
    assert run(tmp_path, "growth-demo", {"mesh": 1024}) == 0
    table = (tmp_path / "out" / "growth_table.csv").read_text().splitlines()
    assert table[0] == "lambda,pvar,s,sup_y,log_sup_y,explosion"
    assert len(table) == 5
    assert (tmp_path / "out" / "growth.svg").exists()


def test_changevar_command_default(tmp_path):
    assert run(tmp_path, "changevar-check") == 0


def test_changevar_command_1d_exact(tmp_path, capsys):
    cfg = {
        "field": {"name": "linear", "A": 1.0},
        "driver": {"kind": "zigzag", "n": 6, "amplitude": 0.15, "m": 1,
                   "T": 1.0},
        "a": [2.0],
        "T": 1.0,
        "mesh": 4096,
        "shift": 0.0,
        "tol": 1e-8,
    }
    assert run(tmp_path, "changevar-check", cfg) == 0
    assert "PASS" in capsys.readouterr().out


def test_decompose_command_small_ito(tmp_path, capsys):
    cfg = {"driver": {"kind": "brownian-ito", "steps": 20000, "m": 2,
                      "T": 1.0}}
    assert run(tmp_path, "decompose", cfg, seed=42) == 0
    assert (tmp_path / "out" / "beta.csv").exists()
    assert "beta(T) + T/2 I" in capsys.readouterr().out


def test_decompose_command_pure_area(tmp_path):
    cfg = {"driver": {"kind": "pure-area", "T": 2.0, "m": 1}}
    assert run(tmp_path, "decompose", cfg) == 0


def test_explosion_demo_command_small(tmp_path, capsys):
    # reduced fine mesh for test runtime; tolerance scaled accordingly
    cfg = {"fine_mesh": 16384, "traj_tol": 2e-3, "coarse_mesh": 4096}
    assert run(tmp_path, "explosion-demo", cfg) == 0
    blow = json.loads((tmp_path / "out" / "explosion_blowup.json").read_text())
    assert blow["threshold"] == 1e6
    assert 0.95 <= blow["crossing_time"] <= 1.05
    assert (tmp_path / "out" / "explosion.svg").exists()


def test_lift_and_solve_commands(tmp_path):
    src = tmp_path / "poly.csv"
    src.write_text("t,x1\n0,0\n0.5,0.3\n1,0.1\n")
    assert run(tmp_path, "lift", {"input": str(src)}) == 0
    out = (tmp_path / "out" / "roughpath.csv").read_text().splitlines()
    assert out[0] == "s,t,x1,x2_11"
    assert len(out) == 3
    assert run(tmp_path, "solve", {}, name="solved") == 0
    sol = (tmp_path / "solved" / "solution.csv").read_text().splitlines()
    assert sol[0] == "t,y1"


def test_solve_reports_blowup(tmp_path):
    cfg = {
        "field": {"name": "linear", "A": 8.0},
        "driver": {"kind": "zigzag", "n": 2, "amplitude": 2.0, "m": 1,
                   "T": 4.0},
        "a": [1.0],
        "T": 4.0,
        "mesh": 2048,
        "solver": {"r_max": 10.0},
    }
    assert run(tmp_path, "solve", cfg) == 0
    assert (tmp_path / "out" / "blowup.json").exists()


def test_outputs_are_deterministic(tmp_path):
    assert run(tmp_path, "growth-demo", {"mesh": 512}, name="a") == 0
    assert run(tmp_path, "growth-demo", {"mesh": 512}, name="b") == 0
    for fname in ("growth_table.csv", "growth.svg", "report.txt"):
        assert ((tmp_path / "a" / fname).read_bytes()
                == (tmp_path / "b" / fname).read_bytes())


def test_bad_config_exits_two(tmp_path, capsys):
    assert run(tmp_path, "convergence", {"meshes": [100]}) == 2
    assert "power of two" in capsys.readouterr().err
    assert run(tmp_path, "lift", {}) == 2


def test_failing_check_exits_one(tmp_path):
    # an impossible tolerance makes the changevar check fail loudly
    assert run(tmp_path, "changevar-check", {"tol": 1e-18, "mesh": 256}) == 1


def test_help_lists_defaults(capsys):
    with pytest.raises(SystemExit):
        main(["--help"])
    text = capsys.readouterr().out
    assert "defaults" in text
    assert "explosion-demo" in text
