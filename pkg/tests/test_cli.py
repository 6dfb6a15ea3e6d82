"""End-to-end runs of the command line, in process via main(argv)."""

import json
import xml.etree.ElementTree as ET

import pytest

from multitrip import ExperimentConfig, Instance, SolverSpec
from multitrip.cli import main
from oracles import oracle_min_completion_time


def _gen(tmp_path, name="inst.json", n=5, seed=3, extra=()):
    path = tmp_path / name
    code = main(["gen", "--n", str(n), "--seed", str(seed), "--out", str(path),
                 *extra])
    assert code == 0
    return path


def test_gen_is_deterministic(tmp_path, capsys):
    a = _gen(tmp_path, "a.json")
    b = _gen(tmp_path, "b.json")
    assert a.read_bytes() == b.read_bytes()
    assert "wrote" in capsys.readouterr().out


def test_gen_rejects_bad_parameters(tmp_path):
    out = str(tmp_path / "x.json")
    assert main(["gen", "--n", "0", "--out", out]) == 2
    assert main(["gen", "--n", "5", "--budgets", "abc", "--out", out]) == 2
    assert main(["gen", "--n", "5", "--depots", "2", "--fleets", "1,2,3",
                 "--out", out]) == 2


@pytest.mark.parametrize("solver", ["exact", "math", "tsp", "greedy"])
def test_solve_prints_status_line(tmp_path, capsys, solver):
    inst = _gen(tmp_path)
    capsys.readouterr()
    assert main(["solve", "--input", str(inst), "--solver", solver]) == 0
    status, objective, trips, wall = capsys.readouterr().out.split()
    assert status in ("OPTIMAL", "FEASIBLE_TIME_LIMIT")
    assert float(objective) > 0
    assert int(trips) >= 1
    assert float(wall) >= 0


def test_solve_exact_matches_oracle(tmp_path, capsys):
    inst_path = _gen(tmp_path)
    capsys.readouterr()
    assert main(["solve", "--input", str(inst_path), "--solver", "exact"]) == 0
    _, objective, _, _ = capsys.readouterr().out.split()
    expected = oracle_min_completion_time(Instance.load(str(inst_path)))
    assert float(objective) == pytest.approx(expected, abs=1e-6)


def test_solve_respects_time_limit_contract(tmp_path, capsys):
    inst = _gen(tmp_path, n=16)
    capsys.readouterr()
    code = main(["solve", "--input", str(inst), "--solver", "exact",
                 "--time-limit", "0.05"])
    assert code == 0
    status = capsys.readouterr().out.split()[0]
    assert status in ("OPTIMAL", "FEASIBLE_TIME_LIMIT")


def test_solve_missing_input_is_usage_error(tmp_path):
    assert main(["solve", "--input", str(tmp_path / "no.json")]) == 2


def test_solve_validate_render_pipeline(tmp_path, capsys):
    inst = _gen(tmp_path)
    sol = tmp_path / "sol.json"
    assert main(["solve", "--input", str(inst), "--solver", "math",
                 "--out", str(sol)]) == 0
    payload = json.loads(sol.read_text())
    assert set(payload) == {"status", "objective", "best_lower_bound",
                            "nodes_explored", "wall_time_s", "solution"}

    assert main(["validate", "--instance", str(inst), "--solution", str(sol)]) == 0
    svg = tmp_path / "routes.svg"
    assert main(["render", "--instance", str(inst), "--solution", str(sol),
                 "--out", str(svg)]) == 0
    capsys.readouterr()
    root = ET.fromstring(svg.read_text())
    assert root.tag.endswith("svg")
    assert any(child.tag.endswith("polyline") for child in root.iter())


def test_validate_flags_a_doctored_solution(tmp_path, capsys):
    inst = _gen(tmp_path)
    sol = tmp_path / "sol.json"
    assert main(["solve", "--input", str(inst), "--solver", "greedy",
                 "--out", str(sol)]) == 0
    payload = json.loads(sol.read_text())
    payload["solution"]["trips"] = payload["solution"]["trips"][1:]
    doctored = tmp_path / "bad.json"
    doctored.write_text(json.dumps(payload))
    capsys.readouterr()
    assert main(["validate", "--instance", str(inst),
                 "--solution", str(doctored)]) == 1
    assert "not covered" in capsys.readouterr().out


def test_bench_runs_a_config_file(tmp_path, capsys):
    config = ExperimentConfig(
        name="cli-tiny", ns=(5,), seeds=(0,),
        solvers=(SolverSpec("exact-ct", "exact"), SolverSpec("h-greedy", "h_greedy")),
        record_timing=False,
    )
    cfg_path = tmp_path / "config.json"
    cfg_path.write_text(json.dumps(config.to_dict()))
    out_dir = tmp_path / "results"
    assert main(["bench", "--config", str(cfg_path), "--out-dir", str(out_dir)]) == 0
    csv = (out_dir / "cli-tiny.csv").read_text().splitlines()
    assert csv[0].startswith("seed,n,config")
    assert len(csv) == 3
    assert "2 rows, 2 clean" in capsys.readouterr().out


def test_bench_rejects_unknown_config(tmp_path, capsys):
    assert main(["bench", "--config", "no-such-preset",
                 "--out-dir", str(tmp_path)]) == 2
    assert "preset" in capsys.readouterr().err


def test_usage_exit_codes(capsys):
    assert main(["--help"]) == 0
    assert main(["frobnicate"]) == 2
    assert main([]) == 2
    capsys.readouterr()
